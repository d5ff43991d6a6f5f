/**
 * Minimal deterministic SVG chart kit.
 *
 * Everything is plain string assembly with fixed-precision number formatting,
 * so the same inputs always produce byte-identical files.
 */

export const WIDTH = 840;
export const HEIGHT = 520;
export const MARGIN = { top: 44, right: 176, bottom: 54, left: 74 };

export const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
export const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

export const PALETTE = ['#1f6fb4', '#d1483a', '#2f9e57', '#8a56b0', '#c98a1e', '#4db3b3'];

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return '0';
  // toPrecision then re-parse strips trailing zeros without locale surprises
  return String(parseFloat(x.toPrecision(6)));
}

export function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

/** Linear scale; a degenerate domain maps everything to the range midpoint. */
export function linScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const scale = ((v: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
}

/** Round tick positions covering [lo, hi], 1/2/5 steps. */
export function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / n;
  const base = Math.pow(10, Math.floor(Math.log10(raw)));
  const err = raw / base;
  const step = base * (err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1);
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(parseFloat(v.toPrecision(12)));
  }
  return out;
}

/** Pad a data extent a little so marks do not sit on the frame. */
export function extent(values: number[], fallback: [number, number] = [0, 1]): [number, number] {
  if (values.length === 0) return fallback;
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(Number.isFinite(lo) && Number.isFinite(hi))) return fallback;
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const pad = (hi - lo) * 0.03;
  return [lo - pad, hi + pad];
}

/** White-to-red ramp for load/similarity intensities, t clamped to [0, 1]. */
export function heatColor(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const r = Math.round(255 - 80 * c);
  const g = Math.round(248 - 195 * c);
  const b = Math.round(245 - 210 * c);
  return `rgb(${r},${g},${b})`;
}

export function open(title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    `<text x="${MARGIN.left}" y="26" font-size="16" fill="#222">${esc(title)}</text>\n`
  );
}

export const CLOSE = '</svg>\n';

/** Frame, tick marks, tick labels and axis titles for a standard XY panel. */
export function axes(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const left = MARGIN.left;
  const top = MARGIN.top;
  const right = left + PLOT_W;
  const bottom = top + PLOT_H;
  let out = `<rect x="${left}" y="${top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#444"/>\n`;
  for (const t of ticks(x.domain[0], x.domain[1])) {
    const px = fmt(x(t));
    out += `<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 5}" stroke="#444"/>\n`;
    out += `<text x="${px}" y="${bottom + 18}" font-size="11" text-anchor="middle" fill="#333">${fmt(t)}</text>\n`;
  }
  for (const t of ticks(y.domain[0], y.domain[1])) {
    const py = fmt(y(t));
    out += `<line x1="${left - 5}" y1="${py}" x2="${left}" y2="${py}" stroke="#444"/>\n`;
    out += `<text x="${left - 8}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#333">${fmt(t)}</text>\n`;
  }
  out += `<text x="${left + PLOT_W / 2}" y="${bottom + 38}" font-size="13" text-anchor="middle" fill="#222">${esc(xLabel)}</text>\n`;
  out +=
    `<text x="20" y="${top + PLOT_H / 2}" font-size="13" text-anchor="middle" fill="#222" ` +
    `transform="rotate(-90 20 ${top + PLOT_H / 2})">${esc(yLabel)}</text>\n`;
  return out;
}

export function legend(labels: string[]): string {
  const x = MARGIN.left + PLOT_W + 14;
  let out = '';
  labels.forEach((label, i) => {
    const y = MARGIN.top + 14 + i * 20;
    const color = PALETTE[i % PALETTE.length];
    out += `<line x1="${x}" y1="${y}" x2="${x + 22}" y2="${y}" stroke="${color}" stroke-width="2"/>\n`;
    out += `<text x="${x + 28}" y="${y + 4}" font-size="12" fill="#222">${esc(label)}</text>\n`;
  });
  return out;
}

export function polyline(points: Array<[number, number]>, color: string, width = 1.5): string {
  if (points.length === 0) return '';
  const pts = points.map(([px, py]) => `${fmt(px)},${fmt(py)}`).join(' ');
  return `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="${width}"/>\n`;
}

/** Vertical colorbar for heat panels, annotated with min/max values. */
export function colorbar(lo: number, hi: number, label: string): string {
  const x = MARGIN.left + PLOT_W + 24;
  const top = MARGIN.top;
  const h = PLOT_H;
  const steps = 24;
  let out = '';
  for (let i = 0; i < steps; i++) {
    const t = 1 - i / (steps - 1);
    const y = top + (i * h) / steps;
    out += `<rect x="${x}" y="${fmt(y)}" width="16" height="${fmt(h / steps + 0.5)}" fill="${heatColor(t)}"/>\n`;
  }
  out += `<rect x="${x}" y="${top}" width="16" height="${h}" fill="none" stroke="#444"/>\n`;
  out += `<text x="${x + 22}" y="${top + 10}" font-size="11" fill="#333">${fmt(hi)}</text>\n`;
  out += `<text x="${x + 22}" y="${top + h}" font-size="11" fill="#333">${fmt(lo)}</text>\n`;
  out += `<text x="${x + 8}" y="${top - 8}" font-size="11" text-anchor="middle" fill="#222">${esc(label)}</text>\n`;
  return out;
}
