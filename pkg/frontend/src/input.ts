/**
 * Keyboard state -> one of the eight compass directions the server
 * understands (0 = east, counterclockwise), or null for "no force".
 *
 * Opposing keys cancel: left+right or up+down contribute nothing on that
 * axis, and if both axes cancel the swarm gets a zero vector, exactly as
 * if no key were held.
 */

export type Axis = -1 | 0 | 1;

const KEY_TO_MOVE: Record<string, [number, number]> = {
  ArrowRight: [1, 0],
  ArrowLeft: [-1, 0],
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  KeyD: [1, 0],
  KeyA: [-1, 0],
  KeyW: [0, 1],
  KeyS: [0, -1],
};

// planner-order directions: E, NE, N, NW, W, SW, S, SE
const DIR_OF: Record<string, number> = {
  "1,0": 0,
  "1,1": 1,
  "0,1": 2,
  "-1,1": 3,
  "-1,0": 4,
  "-1,-1": 5,
  "0,-1": 6,
  "1,-1": 7,
};

export class KeyTracker {
  private held = new Set<string>();

  /** Returns true when the key is one we track (callers preventDefault). */
  press(code: string): boolean {
    if (!(code in KEY_TO_MOVE)) return false;
    this.held.add(code);
    return true;
  }

  release(code: string): void {
    this.held.delete(code);
  }

  /** Drop everything held, e.g. when the window loses focus. */
  clear(): void {
    this.held.clear();
  }

  axes(): [Axis, Axis] {
    let x = 0;
    let y = 0;
    for (const code of this.held) {
      const [dx, dy] = KEY_TO_MOVE[code];
      x += dx;
      y += dy;
    }
    // several keys can pull the same way (arrow + WASD); clamp to one unit
    const cx = (x > 0 ? 1 : x < 0 ? -1 : 0) as Axis;
    const cy = (y > 0 ? 1 : y < 0 ? -1 : 0) as Axis;
    return [cx, cy];
  }

  /** Current compass direction, or null when the net input is zero. */
  direction(): number | null {
    const [x, y] = this.axes();
    if (x === 0 && y === 0) return null;
    return DIR_OF[`${x},${y}`];
  }
}
