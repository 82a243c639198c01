/**
 * Wire protocol: zod schemas for every frame the server can send and
 * builders for every frame we may send back.
 *
 * The client treats the server as the single source of truth; anything
 * that does not validate here is a protocol error and ends the session,
 * never a silent best-effort render.
 */
import { z } from "zod";

export const MODES = ["full", "hull", "mean", "meanvar"] as const;
export type Mode = (typeof MODES)[number];

const pointList = z.array(z.array(z.number()).length(2));

export const welcomeSchema = z.object({
  type: z.literal("welcome"),
  participant: z.string(),
  scenario: z.string(),
  tick_hz: z.number().positive(),
  max_time_s: z.number().positive(),
  world: z.object({
    width: z.number().positive(),
    height: z.number().positive(),
    particle_radius: z.number().positive(),
    obstacles: z.array(z.array(z.number()).length(4)),
    goal: z.array(z.number()).length(2),
    goal_radius: z.number().positive(),
    object_hull: pointList,
  }),
});

export const stateSchema = z
  .object({
    type: z.literal("state"),
    tick: z.number().int().nonnegative(),
    elapsed_s: z.number().nonnegative(),
    object: z.array(z.number()).length(3),
    particles: pointList.optional(),
    hull: pointList.optional(),
    mean: z.array(z.number()).length(2).optional(),
    covariance: z.array(z.array(z.number()).length(2)).length(2).optional(),
  })
  .strict();

export const resultSchema = z.object({
  type: z.literal("result"),
  success: z.boolean(),
  completion_time_s: z.number().nonnegative(),
  percentile_vs_history: z.number().min(0).max(100),
});

export const errorSchema = z.object({
  type: z.literal("error"),
  error: z.string(),
});

export const serverFrameSchema = z.discriminatedUnion("type", [
  welcomeSchema,
  stateSchema,
  resultSchema,
  errorSchema,
]);

export type Welcome = z.infer<typeof welcomeSchema>;
export type StateFrame = z.infer<typeof stateSchema>;
export type ResultFrame = z.infer<typeof resultSchema>;
export type ErrorFrame = z.infer<typeof errorSchema>;
export type ServerFrame = z.infer<typeof serverFrameSchema>;

export function parseServerFrame(raw: string): ServerFrame {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error("server sent a frame that is not JSON");
  }
  return serverFrameSchema.parse(data);
}

/** The swarm keys a state frame is allowed to carry in each mode. */
export const MODE_PAYLOAD: Record<Mode, readonly string[]> = {
  full: ["particles"],
  hull: ["hull"],
  mean: ["mean"],
  meanvar: ["mean", "covariance"],
};

const SWARM_KEYS = ["particles", "hull", "mean", "covariance"] as const;

/**
 * True when the frame carries exactly the swarm payload of `mode` --
 * the privacy conditions of the experiment, checked client-side too so a
 * misconfigured server is caught in tests rather than rendered.
 */
export function payloadMatchesMode(frame: StateFrame, mode: Mode): boolean {
  const present = SWARM_KEYS.filter((k) => frame[k] !== undefined);
  const wanted = MODE_PAYLOAD[mode];
  return (
    present.length === wanted.length && wanted.every((k) => present.includes(k as never))
  );
}

export function helloFrame(mode: Mode, scenario?: string): string {
  return JSON.stringify(
    scenario === undefined
      ? { type: "hello", mode }
      : { type: "hello", mode, scenario },
  );
}

export function inputFrame(tick: number, direction: number): string {
  if (!Number.isInteger(direction) || direction < 0 || direction > 7) {
    throw new Error(`direction out of range: ${direction}`);
  }
  return JSON.stringify({ type: "input", tick, direction });
}

export function forceFrame(tick: number, fx: number, fy: number): string {
  return JSON.stringify({ type: "input", tick, force: [fx, fy] });
}

export function restartFrame(): string {
  return JSON.stringify({ type: "restart" });
}
