/**
 * Session schema enforced before any upload leaves the client.
 *
 * Mirrors the service-side rules: exact key sets, format_version 1,
 * strictly increasing timestamps, and at least 20 Hz sampling.
 */
import { z } from "zod";

import type { GazeSessionDoc } from "./types.js";

const MIN_RATE_HZ = 20;

const finite = z.number().finite();
const vec2 = z.tuple([finite, finite]);

const sampleSchema = z
  .object({
    t: finite,
    gaze_xy: vec2,
    agent_xy: vec2,
    agent_v: vec2,
  })
  .strict();

export const sessionSchema = z
  .object({
    format_version: z.literal(1),
    scene_ref: z.object({ dataset_id: z.string(), start_frame: z.number().int() }).strict(),
    goal: vec2,
    samples: z.array(sampleSchema).min(2),
  })
  .strict()
  .superRefine((doc, ctx) => {
    for (let i = 1; i < doc.samples.length; i += 1) {
      const gap = doc.samples[i].t - doc.samples[i - 1].t;
      if (gap <= 0) {
        ctx.addIssue({
          code: z.ZodIssueCode.custom,
          path: ["samples", i, "t"],
          message: `timestamps must strictly increase (sample ${i})`,
        });
        return;
      }
      if (gap > 1 / MIN_RATE_HZ + 1e-9) {
        ctx.addIssue({
          code: z.ZodIssueCode.custom,
          path: ["samples", i, "t"],
          message: `sampling gap ${gap.toFixed(4)}s at sample ${i} is below ${MIN_RATE_HZ} Hz`,
        });
        return;
      }
    }
  });

export function validateSession(doc: unknown): GazeSessionDoc {
  return sessionSchema.parse(doc) as GazeSessionDoc;
}

/**
 * Canonical byte encoding: fixed key order, default JS number formatting.
 * Identical documents serialize to identical bytes, which the service
 * preserves verbatim.
 */
export function serializeSession(doc: GazeSessionDoc): string {
  return JSON.stringify({
    format_version: doc.format_version,
    scene_ref: { dataset_id: doc.scene_ref.dataset_id, start_frame: doc.scene_ref.start_frame },
    goal: doc.goal,
    samples: doc.samples.map((s) => ({
      t: s.t,
      gaze_xy: s.gaze_xy,
      agent_xy: s.agent_xy,
      agent_v: s.agent_v,
    })),
  });
}
