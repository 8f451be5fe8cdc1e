// DOM wiring: websocket lifecycle, the axis ball and sliders, and the canvas
// executor for the pure scene renderer. No command leaves while disconnected
// or paused (steering) and drags are rate limited to the server contract.

import { SteeringLimiter, makePulse, makePump, makeSetRotating, makeSimple, normalize } from "./protocol";
import { ConsoleState, Draw, WorldSketch, renderScene, worldFromScenario } from "./scene";
import { StateFrame, Vec3, isStateFrame } from "./types";

const STALE_AFTER_MS = 1000;

export class Console {
  private ws: WebSocket | null = null;
  private frame: StateFrame | null = null;
  private lastFrameAt = 0;
  private world: WorldSketch = { ground: true, waterLevel: null, waterFrom: null, walls: [], cargo: [] };
  private limiter: SteeringLimiter;
  private axis: Vec3 = [0, 1, 0];
  private state: ConsoleState;

  constructor(
    private canvas: HTMLCanvasElement,
    private ui: {
      status: HTMLElement;
      strength: HTMLInputElement;
      freq: HTMLInputElement;
      strengthOut: HTMLElement;
      freqOut: HTMLElement;
      ball: HTMLCanvasElement;
      pulseBtn: HTMLButtonElement;
      pumpBtn: HTMLButtonElement;
      offBtn: HTMLButtonElement;
      pauseBtn: HTMLButtonElement;
    },
  ) {
    this.state = {
      connected: false,
      stale: false,
      camera: { yawDeg: -20, pitchDeg: 30, scale: 3200, center: [0.05, 0, 0.01] },
      width: canvas.width,
      height: canvas.height,
    };
    this.limiter = new SteeringLimiter({ send: (cmd) => this.sendRaw(cmd) });
    this.wireWidgets();
    setInterval(() => this.limiter.tick(), 20);
    setInterval(() => this.redraw(), 50);
  }

  connect(url: string): void {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      this.state.connected = true;
      this.ui.status.textContent = "connected";
      void this.fetchWorld();
    };
    this.ws.onclose = () => {
      this.state.connected = false;
      this.ui.status.textContent = "disconnected";
    };
    this.ws.onmessage = (ev) => {
      const msg = JSON.parse(ev.data as string);
      if (isStateFrame(msg)) {
        this.frame = msg;
        this.lastFrameAt = performance.now();
      }
    };
  }

  private async fetchWorld(): Promise<void> {
    try {
      const resp = await fetch("/scenario");
      this.world = worldFromScenario(await resp.text());
    } catch {
      // keep the default sketch; the robot still renders
    }
  }

  private sendRaw(cmd: unknown): void {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return;
    if (this.frame?.paused && (cmd as { type?: string }).type === "set_rotating") return;
    this.ws.send(JSON.stringify(cmd));
  }

  private steer(): void {
    if (!this.state.connected || this.frame?.paused) return;
    this.limiter.steer(
      makeSetRotating(this.axis, parseFloat(this.ui.strength.value), parseFloat(this.ui.freq.value)),
    );
  }

  private wireWidgets(): void {
    const ball = this.ui.ball;
    const applyDrag = (ev: PointerEvent) => {
      const rect = ball.getBoundingClientRect();
      const u = ((ev.clientX - rect.left) / rect.width) * 2 - 1;
      const v = -(((ev.clientY - rect.top) / rect.height) * 2 - 1);
      const r2 = u * u + v * v;
      const z = r2 < 1 ? Math.sqrt(1 - r2) : 0;
      // ball x = world x, ball y = world y, rim = horizontal axes
      this.axis = normalize([u, v, z]);
      this.drawBall();
      this.steer();
    };
    let dragging = false;
    ball.addEventListener("pointerdown", (ev) => {
      dragging = true;
      ball.setPointerCapture(ev.pointerId);
      applyDrag(ev);
    });
    ball.addEventListener("pointermove", (ev) => {
      if (dragging) applyDrag(ev);
    });
    ball.addEventListener("pointerup", () => {
      dragging = false;
    });
    const updateOut = () => {
      this.ui.strengthOut.textContent = `${this.ui.strength.value} mT`;
      this.ui.freqOut.textContent = `${this.ui.freq.value} Hz`;
    };
    this.ui.strength.addEventListener("input", () => {
      updateOut();
      this.steer();
    });
    this.ui.freq.addEventListener("input", () => {
      updateOut();
      this.steer();
    });
    updateOut();
    this.ui.pulseBtn.addEventListener("click", () => {
      if (!this.state.connected) return;
      this.limiter.sendDiscrete(makePulse(this.axis, 40, 3));
    });
    this.ui.pumpBtn.addEventListener("click", () => {
      if (!this.state.connected) return;
      this.limiter.sendDiscrete(makePump(1, 200));
    });
    this.ui.offBtn.addEventListener("click", () => {
      if (!this.state.connected) return;
      this.limiter.sendDiscrete(makeSimple("field_off"));
    });
    this.ui.pauseBtn.addEventListener("click", () => {
      if (!this.state.connected) return;
      const paused = this.frame?.paused ?? false;
      this.limiter.sendDiscrete(makeSimple(paused ? "resume" : "pause"));
      this.ui.pauseBtn.textContent = paused ? "pause" : "resume";
    });
    this.drawBall();
  }

  private drawBall(): void {
    const ctx = this.ui.ball.getContext("2d")!;
    const w = this.ui.ball.width;
    ctx.clearRect(0, 0, w, w);
    ctx.strokeStyle = "#9ca3af";
    ctx.beginPath();
    ctx.arc(w / 2, w / 2, w / 2 - 2, 0, Math.PI * 2);
    ctx.stroke();
    const [x, y] = this.axis;
    ctx.fillStyle = "#2563eb";
    ctx.beginPath();
    ctx.arc(w / 2 + (x * (w / 2 - 6)), w / 2 - (y * (w / 2 - 6)), 6, 0, Math.PI * 2);
    ctx.fill();
  }

  private redraw(): void {
    this.state.stale =
      this.state.connected && performance.now() - this.lastFrameAt > STALE_AFTER_MS;
    const draws = renderScene(this.state, this.frame, this.world);
    execute(this.canvas, draws);
  }
}

export function execute(canvas: HTMLCanvasElement, draws: Draw[]): void {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  for (const d of draws) {
    if (d.kind === "poly") {
      ctx.beginPath();
      ctx.moveTo(d.pts[0][0], d.pts[0][1]);
      for (const p of d.pts.slice(1)) ctx.lineTo(p[0], p[1]);
      if (d.close) ctx.closePath();
      if (d.fill) {
        ctx.fillStyle = d.fill;
        ctx.fill();
      }
      ctx.strokeStyle = d.stroke;
      ctx.lineWidth = d.width;
      ctx.stroke();
    } else if (d.kind === "circle") {
      ctx.beginPath();
      ctx.arc(d.c[0], d.c[1], d.r, 0, Math.PI * 2);
      if (d.fill) {
        ctx.fillStyle = d.fill;
        ctx.fill();
      }
      ctx.strokeStyle = d.stroke;
      ctx.stroke();
    } else if (d.kind === "text") {
      ctx.fillStyle = d.color;
      ctx.font = `${d.size}px sans-serif`;
      ctx.fillText(d.text, d.p[0], d.p[1]);
    } else {
      ctx.fillStyle = d.color;
      ctx.fillRect(0, 0, canvas.width, 28);
      ctx.fillStyle = "#ffffff";
      ctx.font = "14px sans-serif";
      ctx.fillText(d.text, 12, 19);
    }
  }
}
