/**
 * Browser app for the steering task.
 *
 * Keyboard (WASD / arrows) steers the virtual pedestrian toward the goal
 * marker while the crowd replays underneath; the mouse cursor is sampled
 * at 50 Hz in world coordinates as the gaze proxy. Finished trials are
 * validated and uploaded; failures stay in a local retry queue.
 */
import { CaptureClient, LocalStorageQueueStore } from "./client.js";
import { DEFAULT_SIM, SteeringSimulation } from "./simulation.js";
import type { GazeSample, GazeSessionDoc, SceneReplay, Vec2 } from "./types.js";
import { parseSceneId } from "./types.js";
import { WorldTransform } from "./world.js";

const AGENT_COLOR = "#f2b705";
const PED_COLOR = "#3a7bd5";
const GOAL_COLOR = "#2fa84f";
const ARROW_SCALE = 0.6; // seconds of motion shown by velocity arrows

interface AppState {
  scene: SceneReplay | null;
  sim: SteeringSimulation | null;
  transform: WorldTransform | null;
  samples: GazeSample[];
  cursorWorld: Vec2;
  keys: Set<string>;
  lastTickAt: number;
  accumulatorMs: number;
  sampleAccumulatorMs: number;
  status: string;
}

function sceneBounds(scene: SceneReplay): { lo: Vec2; hi: Vec2 } {
  let lo = { x: Infinity, y: Infinity };
  let hi = { x: -Infinity, y: -Infinity };
  const extend = (x: number, y: number) => {
    lo = { x: Math.min(lo.x, x), y: Math.min(lo.y, y) };
    hi = { x: Math.max(hi.x, x), y: Math.max(hi.y, y) };
  };
  for (const frame of scene.frames) for (const p of frame) extend(p.x, p.y);
  extend(scene.start[0], scene.start[1]);
  extend(scene.goal[0], scene.goal[1]);
  return { lo, hi };
}

function steeringFromKeys(keys: Set<string>): Vec2 {
  let x = 0;
  let y = 0;
  if (keys.has("ArrowLeft") || keys.has("a")) x -= 1;
  if (keys.has("ArrowRight") || keys.has("d")) x += 1;
  if (keys.has("ArrowUp") || keys.has("w")) y += 1;
  if (keys.has("ArrowDown") || keys.has("s")) y -= 1;
  const mag = Math.hypot(x, y);
  return mag > 0 ? { x: x / mag, y: y / mag } : { x: 0, y: 0 };
}

export function startApp(root: HTMLElement, baseUrl = window.location.origin): void {
  const canvas = document.createElement("canvas");
  canvas.width = 900;
  canvas.height = 640;
  const hud = document.createElement("div");
  hud.className = "hud";
  const picker = document.createElement("select");
  const startButton = document.createElement("button");
  startButton.textContent = "Start trial";
  const retryButton = document.createElement("button");
  retryButton.textContent = "Retry uploads";
  hud.append(picker, startButton, retryButton);
  root.append(hud, canvas);

  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  const client = new CaptureClient(baseUrl, new LocalStorageQueueStore());

  const state: AppState = {
    scene: null,
    sim: null,
    transform: null,
    samples: [],
    cursorWorld: { x: 0, y: 0 },
    keys: new Set(),
    lastTickAt: 0,
    accumulatorMs: 0,
    sampleAccumulatorMs: 0,
    status: "pick a scene",
  };

  client
    .listScenes()
    .then((scenes) => {
      for (const s of scenes) {
        const option = document.createElement("option");
        option.value = s.scene_id;
        option.textContent = `${s.scene_id} (${s.n_pedestrians} pedestrians)`;
        picker.append(option);
      }
      state.status = scenes.length ? "ready" : "no scenes on the service";
    })
    .catch((err) => {
      state.status = `scene list failed: ${err}`;
    });

  startButton.addEventListener("click", async () => {
    const scene = await client.getScene(picker.value);
    const { lo, hi } = sceneBounds(scene);
    state.scene = scene;
    state.transform = WorldTransform.fitBounds(lo, hi, canvas.width, canvas.height);
    state.sim = new SteeringSimulation(scene);
    state.samples = [];
    state.accumulatorMs = 0;
    state.sampleAccumulatorMs = 0;
    state.lastTickAt = performance.now();
    state.status = "steer to the goal";
  });

  retryButton.addEventListener("click", async () => {
    const results = await client.retryPending();
    state.status = `retried ${results.length} uploads, ${client.pendingRetries()} still queued`;
  });

  window.addEventListener("keydown", (e) => state.keys.add(e.key));
  window.addEventListener("keyup", (e) => state.keys.delete(e.key));
  canvas.addEventListener("mousemove", (e) => {
    if (!state.transform) return;
    const rect = canvas.getBoundingClientRect();
    state.cursorWorld = state.transform.toWorld({
      x: e.clientX - rect.left,
      y: e.clientY - rect.top,
    });
  });

  async function finishTrial(): Promise<void> {
    if (!state.scene || !state.sim) return;
    if (state.samples.length < 2) {
      state.status = "trial too short to upload";
      return;
    }
    const session: GazeSessionDoc = {
      format_version: 1,
      scene_ref: parseSceneId(state.scene.scene_id),
      goal: [state.scene.goal[0], state.scene.goal[1]],
      samples: state.samples,
    };
    const result = await client.uploadSession(session);
    state.status = result.ok
      ? `uploaded as ${result.sessionId}`
      : result.queued
        ? "upload failed; kept for retry"
        : `rejected: ${result.error}`;
    state.scene = null;
    state.sim = null;
  }

  function drawArrow(from: Vec2, velocity: Vec2, color: string): void {
    if (!state.transform || !ctx) return;
    const tip = { x: from.x + velocity.x * ARROW_SCALE, y: from.y + velocity.y * ARROW_SCALE };
    const a = state.transform.toScreen(from);
    const b = state.transform.toScreen(tip);
    ctx.strokeStyle = color;
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }

  function render(now: number): void {
    requestAnimationFrame(render);
    if (!ctx) return;
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#d0d6dd";
    ctx.font = "14px sans-serif";
    ctx.fillText(state.status, 12, 20);

    const { scene, sim, transform } = state;
    if (!scene || !sim || !transform) return;

    // Fixed-timestep updates, decoupled from the render rate.
    const elapsed = now - state.lastTickAt;
    state.lastTickAt = now;
    state.accumulatorMs += elapsed;
    state.sampleAccumulatorMs += elapsed;
    while (state.accumulatorMs >= DEFAULT_SIM.tickMs && !sim.state.done) {
      sim.setSteering(steeringFromKeys(state.keys));
      sim.tick();
      state.accumulatorMs -= DEFAULT_SIM.tickMs;
    }
    while (state.sampleAccumulatorMs >= DEFAULT_SIM.gazeSampleMs) {
      const t = state.samples.length * (DEFAULT_SIM.gazeSampleMs / 1000);
      state.samples.push({
        t,
        gaze_xy: [state.cursorWorld.x, state.cursorWorld.y],
        agent_xy: [sim.state.agent.x, sim.state.agent.y],
        agent_v: [sim.state.velocity.x, sim.state.velocity.y],
      });
      state.sampleAccumulatorMs -= DEFAULT_SIM.gazeSampleMs;
    }

    const crowd = sim.pedestrianPositions(sim.state.timeMs);
    const frameIndex = Math.min(
      Math.floor(sim.state.timeMs / (scene.frame_interval * 1000)),
      scene.frames.length - 2,
    );
    crowd.forEach((p, i) => {
      const s = transform.toScreen(p);
      ctx.fillStyle = PED_COLOR;
      ctx.beginPath();
      ctx.arc(s.x, s.y, 7, 0, 2 * Math.PI);
      ctx.fill();
      const next = scene.frames[frameIndex + 1][i];
      const cur = scene.frames[frameIndex][i];
      drawArrow(p, {
        x: (next.x - cur.x) / scene.frame_interval,
        y: (next.y - cur.y) / scene.frame_interval,
      }, "#7fb2f0");
    });

    const goal = transform.toScreen({ x: scene.goal[0], y: scene.goal[1] });
    ctx.strokeStyle = GOAL_COLOR;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(goal.x, goal.y, 10, 0, 2 * Math.PI);
    ctx.stroke();

    const agent = transform.toScreen(sim.state.agent);
    ctx.fillStyle = sim.state.collided ? "#e04f4f" : AGENT_COLOR;
    ctx.beginPath();
    ctx.arc(agent.x, agent.y, 8, 0, 2 * Math.PI);
    ctx.fill();
    drawArrow(sim.state.agent, sim.state.velocity, AGENT_COLOR);

    if (sim.state.done) {
      void finishTrial();
    }
  }

  requestAnimationFrame(render);
}
