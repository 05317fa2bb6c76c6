import { describe, expect, it } from "vitest";

import { WorldTransform } from "../src/world";

describe("world transform", () => {
  it("round-trips well under a millimeter", () => {
    const tf = WorldTransform.fitBounds({ x: -6, y: -4 }, { x: 8, y: 5 }, 900, 640);
    let worst = 0;
    for (let i = 0; i < 500; i += 1) {
      const p = { x: -6 + ((i * 7919) % 1400) / 100, y: -4 + ((i * 104729) % 900) / 100 };
      const back = tf.toWorld(tf.toScreen(p));
      worst = Math.max(worst, Math.hypot(back.x - p.x, back.y - p.y));
    }
    expect(worst).toBeLessThan(1e-3); // 1 mm world scale
    expect(worst).toBeLessThan(1e-9); // in practice it is exact to fp noise
  });

  it("uses one isotropic scale (circles stay circles)", () => {
    const tf = WorldTransform.fitBounds({ x: 0, y: 0 }, { x: 20, y: 5 }, 800, 600);
    const o = tf.toScreen({ x: 3, y: 3 });
    const dx = tf.toScreen({ x: 4, y: 3 });
    const dy = tf.toScreen({ x: 3, y: 4 });
    const scaleX = Math.hypot(dx.x - o.x, dx.y - o.y);
    const scaleY = Math.hypot(dy.x - o.x, dy.y - o.y);
    expect(scaleX).toBeCloseTo(scaleY, 12);
    expect(scaleX).toBeCloseTo(tf.scale, 12);
  });

  it("keeps the scene inside the screen with the margin", () => {
    const lo = { x: -3, y: -2 };
    const hi = { x: 9, y: 6 };
    const tf = WorldTransform.fitBounds(lo, hi, 900, 640, 30);
    for (const corner of [lo, hi, { x: lo.x, y: hi.y }, { x: hi.x, y: lo.y }]) {
      const s = tf.toScreen(corner);
      expect(s.x).toBeGreaterThanOrEqual(29.999);
      expect(s.x).toBeLessThanOrEqual(900.001 - 30);
      expect(s.y).toBeGreaterThanOrEqual(29.999);
      expect(s.y).toBeLessThanOrEqual(640.001 - 30);
    }
  });

  it("rejects a non-positive scale", () => {
    expect(() => new WorldTransform({ x: 0, y: 0 }, 0, 100, 100)).toThrow();
  });
});
