// Minimal canvas line charts. The scaling math is pure so it can be tested
// without a canvas.

import { SeriesPoint } from "./model.js";

export interface PlotScale {
  tMin: number;
  tMax: number;
  yMin: number;
  yMax: number;
}

/** Axis ranges for a set of series, with a little vertical headroom.
 * Flat series get an artificial band so the line stays visible. */
export function plotScale(seriesList: SeriesPoint[][]): PlotScale | null {
  const points = seriesList.flat();
  if (points.length === 0) return null;
  const ts = points.map((p) => p.t);
  const values = points.map((p) => p.value);
  let yMin = Math.min(...values);
  let yMax = Math.max(...values);
  if (yMax - yMin < 1e-9) {
    yMin -= 1;
    yMax += 1;
  } else {
    const pad = (yMax - yMin) * 0.08;
    yMin -= pad;
    yMax += pad;
  }
  let tMin = Math.min(...ts);
  let tMax = Math.max(...ts);
  if (tMax - tMin < 1e-9) tMax = tMin + 1;
  return { tMin, tMax, yMin, yMax };
}

export function toPixel(
  point: SeriesPoint,
  scale: PlotScale,
  width: number,
  height: number,
): [number, number] {
  const x = ((point.t - scale.tMin) / (scale.tMax - scale.tMin)) * width;
  const y = height - ((point.value - scale.yMin) / (scale.yMax - scale.yMin)) * height;
  return [x, y];
}

const PALETTE = ["#2f81f7", "#e3685c", "#3fb950", "#d29922"];

export function drawChart(
  canvas: HTMLCanvasElement,
  seriesList: { label: string; points: SeriesPoint[] }[],
  unit: string,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const scale = plotScale(seriesList.map((s) => s.points));
  ctx.font = "11px system-ui, sans-serif";
  if (!scale) {
    ctx.fillStyle = "#8b949e";
    ctx.fillText("waiting for data...", 8, height / 2);
    return;
  }
  const pad = { left: 42, right: 8, top: 8, bottom: 16 };
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;

  ctx.strokeStyle = "#30363d";
  ctx.fillStyle = "#8b949e";
  for (const frac of [0, 0.5, 1]) {
    const y = pad.top + plotH * (1 - frac);
    ctx.beginPath();
    ctx.moveTo(pad.left, y);
    ctx.lineTo(pad.left + plotW, y);
    ctx.stroke();
    const value = scale.yMin + (scale.yMax - scale.yMin) * frac;
    ctx.fillText(value.toFixed(value < 10 ? 2 : 0), 2, y + 4);
  }
  ctx.fillText(`${unit} · last ${Math.round((scale.tMax - scale.tMin))}s`, pad.left, height - 4);

  seriesList.forEach((series, index) => {
    ctx.strokeStyle = PALETTE[index % PALETTE.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    series.points.forEach((point, i) => {
      const [x, y] = toPixel(point, scale, plotW, plotH);
      if (i === 0) ctx.moveTo(pad.left + x, pad.top + y);
      else ctx.lineTo(pad.left + x, pad.top + y);
    });
    ctx.stroke();
  });
}
