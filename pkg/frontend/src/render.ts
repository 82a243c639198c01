/**
 * State frames -> a flat list of draw operations.
 *
 * Everything here is pure data-in data-out so the tests can assert on
 * exactly what would be drawn without a canvas: the physics never runs
 * client-side, and a frame in hull/mean/meanvar mode must not produce a
 * single per-particle op.
 */
import type { StateFrame, Welcome } from "./protocol.js";

// Okabe-Ito palette: distinguishable under the common color vision
// deficiencies, and nothing is encoded as red-vs-green alone
export const COLORS = {
  background: "#f4f1ea",
  wall: "#3a3a3a",
  particle: "#56b4e9",
  hull: "#0072b2",
  mean: "#cc79a7",
  object: "#e69f00",
  goal: "#009e73",
  text: "#1a1a1a",
} as const;

export const CANVAS_W = 800;
export const CANVAS_H = 600;

export type DrawOp =
  | { op: "clear"; color: string }
  | { op: "rect"; x: number; y: number; w: number; h: number; color: string }
  | { op: "poly"; points: [number, number][]; stroke?: string; fill?: string }
  | {
      op: "circle";
      x: number;
      y: number;
      r: number;
      fill?: string;
      stroke?: string;
    }
  | {
      op: "ellipse";
      x: number;
      y: number;
      rx: number;
      ry: number;
      angle: number;
      stroke: string;
    };

export interface Camera {
  scale: number;
  height: number; // world height, for the y flip
}

export function cameraFor(welcome: Welcome): Camera {
  // the fixed canvas is sized for this world's aspect; other worlds just
  // letterbox within it
  const scale = Math.min(
    CANVAS_W / welcome.world.width,
    CANVAS_H / welcome.world.height,
  );
  return { scale, height: welcome.world.height };
}

export function toCanvas(cam: Camera, wx: number, wy: number): [number, number] {
  return [wx * cam.scale, (cam.height - wy) * cam.scale];
}

function polyOp(
  cam: Camera,
  pts: number[][],
  style: { stroke?: string; fill?: string },
): DrawOp {
  return {
    op: "poly",
    points: pts.map(([x, y]) => toCanvas(cam, x, y)),
    ...style,
  };
}

/** Rotate the object's local hull into the world by its pose. */
export function objectOutline(
  hull: number[][],
  pose: number[],
): [number, number][] {
  const [px, py, theta] = pose;
  const c = Math.cos(theta);
  const s = Math.sin(theta);
  return hull.map(([x, y]) => [px + c * x - s * y, py + s * x + c * y]);
}

/** 2x2 covariance -> 2-sigma ellipse axes and orientation. */
export function covarianceEllipse(cov: number[][]): {
  rx: number;
  ry: number;
  angle: number;
} {
  const [[a, b], [, d]] = cov;
  const tr = a + d;
  const det = a * d - b * b;
  const disc = Math.sqrt(Math.max(0, (tr * tr) / 4 - det));
  const l1 = tr / 2 + disc;
  const l2 = Math.max(0, tr / 2 - disc);
  const angle = Math.abs(b) < 1e-12 ? (a >= d ? 0 : Math.PI / 2) : Math.atan2(l1 - a, b);
  return { rx: 2 * Math.sqrt(Math.max(0, l1)), ry: 2 * Math.sqrt(l2), angle };
}

export function buildDrawList(welcome: Welcome, frame: StateFrame): DrawOp[] {
  const cam = cameraFor(welcome);
  const ops: DrawOp[] = [{ op: "clear", color: COLORS.background }];

  for (const [xmin, ymin, xmax, ymax] of welcome.world.obstacles) {
    const [cx, cy] = toCanvas(cam, xmin, ymax);
    ops.push({
      op: "rect",
      x: cx,
      y: cy,
      w: (xmax - xmin) * cam.scale,
      h: (ymax - ymin) * cam.scale,
      color: COLORS.wall,
    });
  }

  const [gx, gy] = welcome.world.goal;
  const [gcx, gcy] = toCanvas(cam, gx, gy);
  ops.push({
    op: "circle",
    x: gcx,
    y: gcy,
    r: welcome.world.goal_radius * cam.scale,
    stroke: COLORS.goal,
  });

  ops.push(
    polyOp(cam, objectOutline(welcome.world.object_hull, frame.object), {
      fill: COLORS.object,
    }),
  );

  if (frame.particles) {
    const r = Math.max(2, welcome.world.particle_radius * cam.scale);
    for (const [x, y] of frame.particles) {
      const [cx, cy] = toCanvas(cam, x, y);
      ops.push({ op: "circle", x: cx, y: cy, r, fill: COLORS.particle });
    }
  }
  if (frame.hull && frame.hull.length >= 2) {
    ops.push(polyOp(cam, frame.hull, { stroke: COLORS.hull }));
  }
  if (frame.mean) {
    const [cx, cy] = toCanvas(cam, frame.mean[0], frame.mean[1]);
    ops.push({ op: "circle", x: cx, y: cy, r: 6, fill: COLORS.mean });
    if (frame.covariance) {
      const e = covarianceEllipse(frame.covariance);
      ops.push({
        op: "ellipse",
        x: cx,
        y: cy,
        rx: e.rx * cam.scale,
        ry: e.ry * cam.scale,
        angle: -e.angle, // canvas y points down
        stroke: COLORS.mean,
      });
    }
  }
  return ops;
}
