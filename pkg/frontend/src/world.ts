/**
 * World (meters) to screen (pixels) mapping.
 *
 * The transform is a similarity: one isotropic scale plus translation,
 * with the y axis flipped for screen coordinates. Circles stay circles
 * and the inverse is exact to floating-point precision.
 */
import type { Vec2 } from "./types.js";

export class WorldTransform {
  readonly scale: number; // pixels per meter
  readonly center: Vec2; // world point mapped to the screen center
  readonly screenW: number;
  readonly screenH: number;

  constructor(center: Vec2, scale: number, screenW: number, screenH: number) {
    if (scale <= 0) throw new Error(`scale must be positive, got ${scale}`);
    this.center = center;
    this.scale = scale;
    this.screenW = screenW;
    this.screenH = screenH;
  }

  /** Fit a world bounding box into the screen with a margin, isotropically. */
  static fitBounds(
    lo: Vec2,
    hi: Vec2,
    screenW: number,
    screenH: number,
    marginPx = 30,
  ): WorldTransform {
    const spanX = Math.max(hi.x - lo.x, 1e-6);
    const spanY = Math.max(hi.y - lo.y, 1e-6);
    const scale = Math.min(
      (screenW - 2 * marginPx) / spanX,
      (screenH - 2 * marginPx) / spanY,
    );
    const center = { x: (lo.x + hi.x) / 2, y: (lo.y + hi.y) / 2 };
    return new WorldTransform(center, scale, screenW, screenH);
  }

  toScreen(world: Vec2): Vec2 {
    return {
      x: (world.x - this.center.x) * this.scale + this.screenW / 2,
      y: this.screenH / 2 - (world.y - this.center.y) * this.scale,
    };
  }

  toWorld(screen: Vec2): Vec2 {
    return {
      x: (screen.x - this.screenW / 2) / this.scale + this.center.x,
      y: (this.screenH / 2 - screen.y) / this.scale + this.center.y,
    };
  }
}
