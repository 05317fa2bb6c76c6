/**
 * Fixed-timestep steering task over a replayed crowd.
 *
 * The simulation advances on a logical millisecond clock, fully decoupled
 * from rendering: 50 ms physics ticks, 20 ms (50 Hz) gaze sampling. Given
 * the same scene and the same scripted inputs it reproduces the same
 * session bytes on any device.
 */
import type { GazeSample, GazeSessionDoc, SceneReplay, Vec2 } from "./types.js";
import { parseSceneId } from "./types.js";

export interface SimConfig {
  maxSpeed: number; // m/s cap on the steered agent
  tickMs: number; // physics step
  gazeSampleMs: number; // cursor sampling period
  collisionRadius: number; // m, agent counts as colliding within this range
  goalRadius: number; // m, trial ends when the agent gets this close
}

export const DEFAULT_SIM: SimConfig = {
  maxSpeed: 1.5,
  tickMs: 50,
  gazeSampleMs: 20,
  collisionRadius: 0.3,
  goalRadius: 0.4,
};

export interface SteeringState {
  agent: Vec2;
  velocity: Vec2;
  timeMs: number;
  collided: boolean;
  reachedGoal: boolean;
  done: boolean;
}

function clampSpeed(v: Vec2, maxSpeed: number): Vec2 {
  const speed = Math.hypot(v.x, v.y);
  if (speed <= maxSpeed || speed === 0) return v;
  const k = maxSpeed / speed;
  return { x: v.x * k, y: v.y * k };
}

export class SteeringSimulation {
  readonly scene: SceneReplay;
  readonly cfg: SimConfig;
  readonly durationMs: number;
  state: SteeringState;
  private steering: Vec2 = { x: 0, y: 0 };

  constructor(scene: SceneReplay, cfg: SimConfig = DEFAULT_SIM) {
    this.scene = scene;
    this.cfg = cfg;
    // Rounded to whole milliseconds so the float frame interval cannot
    // push the horizon past the final tick.
    this.durationMs = Math.round((scene.frames.length - 1) * scene.frame_interval * 1000);
    this.state = {
      agent: { x: scene.start[0], y: scene.start[1] },
      velocity: { x: 0, y: 0 },
      timeMs: 0,
      collided: false,
      reachedGoal: false,
      done: false,
    };
  }

  /** Steering command as a direction; magnitude above 1 is clamped. */
  setSteering(direction: Vec2): void {
    const mag = Math.hypot(direction.x, direction.y);
    this.steering = mag > 1 ? { x: direction.x / mag, y: direction.y / mag } : direction;
  }

  /** Crowd positions at an arbitrary time, linearly interpolated between frames. */
  pedestrianPositions(timeMs: number): Vec2[] {
    const frames = this.scene.frames;
    const stepMs = this.scene.frame_interval * 1000;
    const raw = Math.min(Math.max(timeMs / stepMs, 0), frames.length - 1);
    const lo = Math.floor(raw);
    const hi = Math.min(lo + 1, frames.length - 1);
    const alpha = raw - lo;
    return frames[lo].map((p, i) => ({
      x: p.x + (frames[hi][i].x - p.x) * alpha,
      y: p.y + (frames[hi][i].y - p.y) * alpha,
    }));
  }

  tick(): void {
    if (this.state.done) return;
    const dt = this.cfg.tickMs / 1000;
    this.state.velocity = clampSpeed(
      { x: this.steering.x * this.cfg.maxSpeed, y: this.steering.y * this.cfg.maxSpeed },
      this.cfg.maxSpeed,
    );
    this.state.agent = {
      x: this.state.agent.x + this.state.velocity.x * dt,
      y: this.state.agent.y + this.state.velocity.y * dt,
    };
    this.state.timeMs += this.cfg.tickMs;

    const crowd = this.pedestrianPositions(this.state.timeMs);
    this.state.collided = crowd.some(
      (p) => Math.hypot(p.x - this.state.agent.x, p.y - this.state.agent.y) < this.cfg.collisionRadius,
    );
    const goalDist = Math.hypot(
      this.scene.goal[0] - this.state.agent.x,
      this.scene.goal[1] - this.state.agent.y,
    );
    this.state.reachedGoal = goalDist <= this.cfg.goalRadius;
    if (this.state.reachedGoal || this.state.timeMs >= this.durationMs) {
      this.state.done = true;
    }
  }
}

export interface TrialInputs {
  /** Steering command at a given logical time. */
  steering(timeMs: number): Vec2;
  /** Cursor position in world meters at a given logical time (the gaze proxy). */
  cursor(timeMs: number): Vec2;
}

/**
 * Run one trial to completion under scripted or live-captured inputs.
 *
 * The logical clock advances in gcd(tick, sample) quanta so sampling and
 * physics interleave deterministically. Returns a schema-shaped session.
 */
export function runTrial(
  scene: SceneReplay,
  inputs: TrialInputs,
  cfg: SimConfig = DEFAULT_SIM,
): GazeSessionDoc {
  const sim = new SteeringSimulation(scene, cfg);
  const quantum = gcd(cfg.tickMs, cfg.gazeSampleMs);
  const samples: GazeSample[] = [];

  // A tick at logical time t advances the physics over (t - tickMs, t],
  // so samples taken at t always read the state at exactly t.
  for (let t = 0; ; t += quantum) {
    if (t > 0 && t % cfg.tickMs === 0 && !sim.state.done) {
      sim.setSteering(inputs.steering(t - cfg.tickMs));
      sim.tick();
    }
    if (t % cfg.gazeSampleMs === 0) {
      const cursor = inputs.cursor(t);
      samples.push({
        t: t / 1000,
        gaze_xy: [cursor.x, cursor.y],
        agent_xy: [sim.state.agent.x, sim.state.agent.y],
        agent_v: [sim.state.velocity.x, sim.state.velocity.y],
      });
    }
    if (sim.state.done) break;
  }

  return {
    format_version: 1,
    scene_ref: parseSceneId(scene.scene_id),
    goal: [scene.goal[0], scene.goal[1]],
    samples,
  };
}

function gcd(a: number, b: number): number {
  let x = a;
  let y = b;
  while (y !== 0) {
    [x, y] = [y, x % y];
  }
  return x;
}
