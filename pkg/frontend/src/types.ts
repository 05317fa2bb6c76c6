export interface Vec2 {
  x: number;
  y: number;
}

export interface PedestrianState {
  id: number;
  x: number;
  y: number;
}

export interface SceneSummary {
  scene_id: string;
  dataset_id: string;
  start_frame: number;
  n_pedestrians: number;
  n_frames: number;
}

export interface SceneReplay {
  scene_id: string;
  frame_interval: number;
  frames: PedestrianState[][];
  start: [number, number];
  goal: [number, number];
}

export interface GazeSample {
  t: number;
  gaze_xy: [number, number];
  agent_xy: [number, number];
  agent_v: [number, number];
}

export interface GazeSessionDoc {
  format_version: 1;
  scene_ref: { dataset_id: string; start_frame: number };
  goal: [number, number];
  samples: GazeSample[];
}

export function parseSceneId(sceneId: string): { dataset_id: string; start_frame: number } {
  const split = sceneId.lastIndexOf(":");
  if (split < 0) {
    throw new Error(`scene id ${sceneId} has no ":<start_frame>" suffix`);
  }
  const frame = Number(sceneId.slice(split + 1));
  if (!Number.isInteger(frame)) {
    throw new Error(`scene id ${sceneId} has a non-integer start frame`);
  }
  return { dataset_id: sceneId.slice(0, split), start_frame: frame };
}
