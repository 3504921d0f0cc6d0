// Wire types mirroring the gateway REST contract.

export interface Pose {
  x: number;
  y: number;
  z: number;
  pitch: number;
  yaw: number;
}

export interface StateSnapshot {
  pose: Pose;
  step_count: number;
  done: boolean;
}

export interface CreateSessionResponse {
  session_id: string;
  description: string;
  start_state: StateSnapshot;
  map_geojson_url: string;
}

export interface ActionResponse {
  state: StateSnapshot;
  render_urls: { topdown: string; oblique: string };
  gsm_url: string;
  done: boolean;
}

export interface RollbackResponse {
  state: StateSnapshot;
}

export interface SubmitResponse {
  distance_to_goal: number;
  success: boolean;
  trajectory_id: string;
}

export type ActionName =
  | 'move-forward'
  | 'turn-left'
  | 'turn-right'
  | 'ascend'
  | 'descend'
  | 'stop';

export const ACTION_NAMES: ActionName[] = [
  'move-forward', 'turn-left', 'turn-right', 'ascend', 'descend', 'stop',
];

export interface GeoJsonFeature {
  type: 'Feature';
  geometry: { type: 'Polygon'; coordinates: number[][][] };
  properties: { name: string; kind?: string };
}

export interface GeoJsonFeatureCollection {
  type: 'FeatureCollection';
  features: GeoJsonFeature[];
}
