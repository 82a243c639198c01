/**
 * Session client: socket lifecycle plus the input-forwarding rule.
 *
 * Inputs ride on the state-frame clock: whenever a state frame arrives we
 * compare the currently held direction with the last thing we sent and
 * forward it only on change (the server holds the previous input).  "No
 * keys" is sent as an explicit zero force, otherwise releasing everything
 * would leave the swarm pushing forever.
 */
import {
  forceFrame,
  helloFrame,
  inputFrame,
  parseServerFrame,
  type Mode,
  type ResultFrame,
  type ServerFrame,
  type StateFrame,
  type Welcome,
} from "./protocol.js";
import { restartFrame } from "./protocol.js";

/** The slice of WebSocket the client uses; tests substitute a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
}

export interface ClientEvents {
  onWelcome?: (w: Welcome) => void;
  onState?: (s: StateFrame) => void;
  onResult?: (r: ResultFrame) => void;
  onError?: (message: string) => void;
  onClose?: () => void;
}

export class SteerClient {
  welcome: Welcome | null = null;
  private lastSent: number | "zero" | null = null;

  constructor(
    private socket: SocketLike,
    private events: ClientEvents,
    private heldDirection: () => number | null,
  ) {
    socket.onmessage = (ev) => this.handle(String(ev.data));
    socket.onclose = () => this.events.onClose?.();
    socket.onerror = () => this.events.onError?.("connection failed");
  }

  hello(mode: Mode, scenario?: string): void {
    this.socket.send(helloFrame(mode, scenario));
  }

  restart(): void {
    this.lastSent = null;
    this.socket.send(restartFrame());
  }

  close(): void {
    this.socket.close();
  }

  private handle(raw: string): void {
    let frame: ServerFrame;
    try {
      frame = parseServerFrame(raw);
    } catch (err) {
      this.events.onError?.(String(err));
      this.socket.close();
      return;
    }
    switch (frame.type) {
      case "welcome":
        this.welcome = frame;
        this.events.onWelcome?.(frame);
        break;
      case "state":
        this.forwardInput(frame);
        this.events.onState?.(frame);
        break;
      case "result":
        this.lastSent = null; // a fresh trial starts from silence
        this.events.onResult?.(frame);
        break;
      case "error":
        this.events.onError?.(frame.error);
        break;
    }
  }

  private forwardInput(frame: StateFrame): void {
    const dir = this.heldDirection();
    const want: number | "zero" = dir === null ? "zero" : dir;
    if (want === this.lastSent) return;
    this.socket.send(
      want === "zero"
        ? forceFrame(frame.tick, 0, 0)
        : inputFrame(frame.tick, want),
    );
    this.lastSent = want;
  }
}
