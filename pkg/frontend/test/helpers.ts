import type { PedestrianState, SceneReplay } from "../src/types";

/** Deterministic 20-frame scene: pedestrians on straight crossing paths. */
export function makeScene(nPedestrians = 3, sceneId = "TOY_A:40"): SceneReplay {
  const frames: PedestrianState[][] = [];
  for (let k = 0; k < 20; k += 1) {
    const frame: PedestrianState[] = [];
    for (let p = 0; p < nPedestrians; p += 1) {
      const heading = (2 * Math.PI * p) / nPedestrians;
      frame.push({
        id: p + 1,
        x: Math.cos(heading) * 3 + Math.cos(heading + Math.PI) * 0.3 * k,
        y: Math.sin(heading) * 3 + Math.sin(heading + Math.PI) * 0.3 * k,
      });
    }
    frames.push(frame);
  }
  return {
    scene_id: sceneId,
    frame_interval: 0.4,
    frames,
    start: [-6, 0],
    goal: [6, 0],
  };
}
