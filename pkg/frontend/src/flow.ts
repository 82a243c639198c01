/**
 * Screen flow: landing -> instructions -> playing -> results -> play again.
 *
 * Two clicks take a visitor from landing to steering: Play, then Go on
 * the instruction overlay.  Five merit-badge outlines sit in the header;
 * each trial played through to a result (win or timeout) fills one in.
 * Abandoning is not a result: closing mid-trial only ever reaches the
 * reconnect screen, and the server files the abandon record.
 */
import type { Mode, ResultFrame } from "./protocol.js";

export type Screen =
  | "landing"
  | "instructions"
  | "playing"
  | "results"
  | "reconnect";

export const BADGE_SLOTS = 5;

export class Flow {
  screen: Screen = "landing";
  mode: Mode = "full";
  trialsFinished = 0;
  lastResult: ResultFrame | null = null;

  chooseMode(mode: Mode): void {
    if (this.screen === "landing") this.mode = mode;
  }

  /** Click one: leave the landing page. */
  play(): void {
    if (this.screen === "landing") this.screen = "instructions";
  }

  /** Click two: dismiss the instruction overlay and start steering. */
  begin(): void {
    if (this.screen === "instructions") this.screen = "playing";
  }

  result(frame: ResultFrame): void {
    if (this.screen !== "playing") return;
    this.lastResult = frame;
    this.trialsFinished += 1;
    this.screen = "results";
  }

  /** The prominent results-screen button; the caller sends the restart frame. */
  playAgain(): void {
    if (this.screen === "results") this.screen = "playing";
  }

  disconnected(): void {
    if (this.screen !== "landing") this.screen = "reconnect";
  }

  /** After a reconnect the overlay shows again rather than dropping into play. */
  reconnected(): void {
    if (this.screen === "reconnect") this.screen = "instructions";
  }

  /** Which of the five badge outlines are filled. */
  badges(): boolean[] {
    return Array.from(
      { length: BADGE_SLOTS },
      (_, i) => i < Math.min(this.trialsFinished, BADGE_SLOTS),
    );
  }
}
