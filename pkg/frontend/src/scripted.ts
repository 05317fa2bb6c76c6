/**
 * Deterministic scripted inputs for replaying a trial without a human.
 *
 * Used by the test harness (replay determinism, service round trips) and
 * handy for smoke-testing a live service from the console.
 */
import type { TrialInputs } from "./simulation.js";
import type { SceneReplay, Vec2 } from "./types.js";

/** Steer straight toward the goal; cursor tracks the nearest pedestrian. */
export function goalSeekingScript(scene: SceneReplay, crowdAt: (tMs: number) => Vec2[]): TrialInputs {
  let agentEstimate: Vec2 = { x: scene.start[0], y: scene.start[1] };
  return {
    steering(tMs: number): Vec2 {
      const dir = { x: scene.goal[0] - agentEstimate.x, y: scene.goal[1] - agentEstimate.y };
      const mag = Math.hypot(dir.x, dir.y);
      const unit = mag > 1e-9 ? { x: dir.x / mag, y: dir.y / mag } : { x: 0, y: 0 };
      // Track our own dead-reckoned position (1.5 m/s, 50 ms ticks).
      agentEstimate = {
        x: agentEstimate.x + unit.x * 1.5 * 0.05,
        y: agentEstimate.y + unit.y * 1.5 * 0.05,
      };
      void tMs;
      return unit;
    },
    cursor(tMs: number): Vec2 {
      const crowd = crowdAt(tMs);
      if (crowd.length === 0) return { x: scene.goal[0], y: scene.goal[1] };
      let best = crowd[0];
      let bestDist = Infinity;
      for (const p of crowd) {
        const d = Math.hypot(p.x - agentEstimate.x, p.y - agentEstimate.y);
        if (d < bestDist) {
          bestDist = d;
          best = p;
        }
      }
      return best;
    },
  };
}

/** Constant steering with a cursor orbiting the scene center; fully static script. */
export function constantScript(scene: SceneReplay): TrialInputs {
  const cx = (scene.start[0] + scene.goal[0]) / 2;
  const cy = (scene.start[1] + scene.goal[1]) / 2;
  return {
    steering(): Vec2 {
      return { x: 1, y: 0 };
    },
    cursor(tMs: number): Vec2 {
      const phase = (tMs / 1000) * 0.8;
      return { x: cx + Math.cos(phase), y: cy + Math.sin(phase) };
    },
  };
}
