import { Console } from "./console";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const console_ = new Console(el<HTMLCanvasElement>("scene"), {
  status: el("status"),
  strength: el<HTMLInputElement>("strength"),
  freq: el<HTMLInputElement>("freq"),
  strengthOut: el("strength-out"),
  freqOut: el("freq-out"),
  ball: el<HTMLCanvasElement>("ball"),
  pulseBtn: el<HTMLButtonElement>("pulse"),
  pumpBtn: el<HTMLButtonElement>("pump"),
  offBtn: el<HTMLButtonElement>("off"),
  pauseBtn: el<HTMLButtonElement>("pause"),
});

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
console_.connect(wsUrl);
