/**
 * Browser wiring: one canvas, three overlay screens, a websocket.
 *
 * Everything interesting lives in the pure modules; this file only moves
 * DOM events into them and draw lists out.  The server address comes from
 * `?server=host:port`, defaulting to the page's host on port 8765.
 */
import { SteerClient, type SocketLike } from "./client.js";
import { Flow, BADGE_SLOTS } from "./flow.js";
import { KeyTracker } from "./input.js";
import { MODES, type Mode, type StateFrame, type Welcome } from "./protocol.js";
import {
  buildDrawList,
  CANVAS_H,
  CANVAS_W,
  COLORS,
  type DrawOp,
} from "./render.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

const canvas = $("board") as unknown as HTMLCanvasElement;
canvas.width = CANVAS_W;
canvas.height = CANVAS_H;
const ctx = canvas.getContext("2d")!;

const flow = new Flow();
const keys = new KeyTracker();
let client: SteerClient | null = null;
let lastWelcome: Welcome | null = null;
let lastState: StateFrame | null = null;

function serverUrl(): string {
  const q = new URLSearchParams(location.search).get("server");
  const host = q ?? `${location.hostname || "127.0.0.1"}:8765`;
  return `ws://${host}`;
}

function paint(ops: DrawOp[]): void {
  for (const o of ops) {
    switch (o.op) {
      case "clear":
        ctx.fillStyle = o.color;
        ctx.fillRect(0, 0, CANVAS_W, CANVAS_H);
        break;
      case "rect":
        ctx.fillStyle = o.color;
        ctx.fillRect(o.x, o.y, o.w, o.h);
        break;
      case "poly":
        ctx.beginPath();
        o.points.forEach(([x, y], i) =>
          i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y),
        );
        ctx.closePath();
        if (o.fill) {
          ctx.fillStyle = o.fill;
          ctx.fill();
        }
        if (o.stroke) {
          ctx.strokeStyle = o.stroke;
          ctx.lineWidth = 2;
          ctx.stroke();
        }
        break;
      case "circle":
        ctx.beginPath();
        ctx.arc(o.x, o.y, o.r, 0, 2 * Math.PI);
        if (o.fill) {
          ctx.fillStyle = o.fill;
          ctx.fill();
        }
        if (o.stroke) {
          ctx.strokeStyle = o.stroke;
          ctx.lineWidth = 3;
          ctx.stroke();
        }
        break;
      case "ellipse":
        ctx.beginPath();
        ctx.ellipse(o.x, o.y, o.rx, o.ry, o.angle, 0, 2 * Math.PI);
        ctx.strokeStyle = o.stroke;
        ctx.lineWidth = 2;
        ctx.stroke();
        break;
    }
  }
}

function drawFrame(): void {
  if (lastWelcome && lastState) paint(buildDrawList(lastWelcome, lastState));
  requestAnimationFrame(drawFrame);
}

function showScreen(): void {
  for (const id of ["landing", "instructions", "results", "reconnect"]) {
    $(id).classList.toggle("hidden", flow.screen !== id);
  }
  $("hud").classList.toggle("hidden", flow.screen === "landing");
  const badges = flow.badges();
  for (let i = 0; i < BADGE_SLOTS; i++) {
    $(`badge-${i}`).classList.toggle("filled", badges[i]);
  }
}

function connect(): void {
  const socket = new WebSocket(serverUrl()) as unknown as SocketLike & {
    onopen: (() => void) | null;
  };
  client = new SteerClient(
    socket,
    {
      onWelcome: (w) => {
        lastWelcome = w;
        $("scenario-name").textContent = w.scenario;
      },
      onState: (s) => {
        lastState = s;
        $("clock").textContent = s.elapsed_s.toFixed(1) + " s";
      },
      onResult: (r) => {
        flow.result(r);
        $("outcome").textContent = r.success
          ? `Delivered in ${r.completion_time_s.toFixed(1)} s — nice!`
          : "Time ran out before the object reached the goal.";
        $("percentile").textContent = r.success
          ? `That beats ${r.percentile_vs_history.toFixed(0)}% of all successful runs so far.`
          : "";
        showScreen();
      },
      onError: () => {
        flow.disconnected();
        showScreen();
      },
      onClose: () => {
        if (flow.screen === "playing") {
          flow.disconnected();
          showScreen();
        }
      },
    },
    () => (flow.screen === "playing" ? keys.direction() : null),
  );
  socket.onopen = () => client!.hello(flow.mode);
}

// ---- landing: mode picker + the first of the two clicks
const picker = $("mode-picker");
for (const mode of MODES) {
  const btn = document.createElement("button");
  btn.textContent = mode;
  btn.className = "mode-option" + (mode === flow.mode ? " chosen" : "");
  btn.onclick = () => {
    flow.chooseMode(mode as Mode);
    picker
      .querySelectorAll(".mode-option")
      .forEach((b) => b.classList.toggle("chosen", b === btn));
  };
  picker.appendChild(btn);
}
$("play").onclick = () => {
  flow.play();
  connect();
  showScreen();
};

// ---- instructions: the second click
$("go").onclick = () => {
  flow.begin();
  showScreen();
};

// ---- results: the prominent replay button
$("play-again").onclick = () => {
  client?.restart();
  flow.playAgain();
  showScreen();
};

$("reconnect-btn").onclick = () => {
  flow.reconnected();
  connect();
  showScreen();
};

window.addEventListener("keydown", (e) => {
  if (flow.screen === "playing" && keys.press(e.code)) e.preventDefault();
});
window.addEventListener("keyup", (e) => keys.release(e.code));
window.addEventListener("blur", () => keys.clear());
// closing the tab mid-trial drops the socket; the server records an abandon
window.addEventListener("beforeunload", () => client?.close());

document.documentElement.style.setProperty("--goal", COLORS.goal);
showScreen();
drawFrame();
