/**
 * The seven figure kinds, each a pure function from validated CSV tables to
 * an SVG string. Rendering never mutates inputs; re-rendering the same
 * tables yields byte-identical output.
 */

import { num, Table } from './csv';
import {
  axes,
  CLOSE,
  colorbar,
  esc,
  extent,
  fmt,
  heatColor,
  legend,
  linScale,
  MARGIN,
  open,
  PALETTE,
  PLOT_H,
  PLOT_W,
  polyline,
  Scale,
} from './svg';

export type PlotKind =
  | 'latency_trace'
  | 'cdf'
  | 'heatmap'
  | 'rewards'
  | 'cka_matrix'
  | 'cka_cdf'
  | 'topology';

export const PLOT_KINDS: PlotKind[] = [
  'latency_trace',
  'cdf',
  'heatmap',
  'rewards',
  'cka_matrix',
  'cka_cdf',
  'topology',
];

/** CSV schema(s) each kind consumes, in --in order. */
export const KIND_SCHEMAS: Record<PlotKind, string[]> = {
  latency_trace: ['latency.csv'],
  cdf: ['cdf.csv'],
  heatmap: ['heatmap.csv'],
  rewards: ['rewards.csv'],
  cka_matrix: ['cka.csv'],
  cka_cdf: ['cka.csv'],
  topology: ['topology.csv', 'nodes.csv'],
};

/** Kinds where extra --in files overlay as additional labeled series. */
export const OVERLAY_KINDS: ReadonlySet<PlotKind> = new Set([
  'latency_trace',
  'cdf',
  'rewards',
  'cka_cdf',
] as PlotKind[]);

export interface Rendered {
  svg: string;
  warnings: string[];
}

function xyScales(xDom: [number, number], yDom: [number, number]): [Scale, Scale] {
  const x = linScale(xDom, [MARGIN.left, MARGIN.left + PLOT_W]);
  const y = linScale(yDom, [MARGIN.top + PLOT_H, MARGIN.top]);
  return [x, y];
}

interface Series {
  label: string;
  points: Array<[number, number]>;
}

/** Shared body for the line-overlay kinds. */
function lineFigure(
  title: string,
  xLabel: string,
  yLabel: string,
  series: Series[],
  warnings: string[],
  yDomOverride?: [number, number],
  dots = false,
): Rendered {
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  if (xs.length === 0) {
    warnings.push(`${title}: no data rows, rendering empty axes`);
  }
  const [x, y] = xyScales(extent(xs), yDomOverride ?? extent(ys));
  let svg = open(title) + axes(x, y, xLabel, yLabel);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points.map(([px, py]) => [x(px), y(py)] as [number, number]);
    svg += polyline(pts, color);
    if (dots) {
      for (const [px, py] of pts) {
        svg += `<circle cx="${fmt(px)}" cy="${fmt(py)}" r="2" fill="${color}" fill-opacity="0.5"/>\n`;
      }
    }
  });
  svg += legend(series.map((s) => s.label)) + CLOSE;
  return { svg, warnings };
}

function latencyTrace(tables: Table[], labels: string[]): Rendered {
  const warnings: string[] = [];
  const series = tables.map((t, i) => {
    const pts = t.rows
      .map((r) => [num(r, 'created_t'), num(r, 'e2e_s') * 1000] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    if (pts.length === 0) warnings.push(`${labels[i]}: no delivered packets`);
    return { label: labels[i], points: pts };
  });
  return lineFigure(
    'end-to-end latency',
    'packet creation time [s]',
    'end-to-end latency [ms]',
    series,
    warnings,
    undefined,
    true,
  );
}

function cdf(tables: Table[], labels: string[]): Rendered {
  const series = tables.map((t, i) => ({
    label: labels[i],
    points: t.rows.map((r) => [num(r, 'latency_s') * 1000, num(r, 'percentile')] as [number, number]),
  }));
  return lineFigure('latency CDF', 'latency [ms]', 'percentile [%]', series, [], [0, 100]);
}

function ckaCdf(tables: Table[], labels: string[]): Rendered {
  const series = tables.map((t, i) => {
    const vals = t.rows
      .filter((r) => r['agent_i'] !== r['agent_j'])
      .map((r) => num(r, 'value'))
      .sort((a, b) => a - b);
    return {
      label: labels[i],
      points: vals.map((v, k) => [v, (100 * (k + 1)) / vals.length] as [number, number]),
    };
  });
  return lineFigure('model similarity CDF', 'CKA similarity', 'percentile [%]', series, [], [0, 100]);
}

function rewards(tables: Table[], labels: string[]): Rendered {
  const warnings: string[] = [];
  const allX: number[] = [];
  const allY: number[] = [];
  const prepared = tables.map((t) => {
    const pts = t.rows
      .map((r) => [num(r, 't'), num(r, 'reward')] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    // window-averaged trend line; raw rewards are too noisy to read directly
    const w = Math.max(1, Math.floor(pts.length / 60));
    const trend: Array<[number, number]> = [];
    for (let i = 0; i + w <= pts.length; i += w) {
      const chunk = pts.slice(i, i + w);
      const mx = chunk.reduce((a, p) => a + p[0], 0) / chunk.length;
      const my = chunk.reduce((a, p) => a + p[1], 0) / chunk.length;
      trend.push([mx, my]);
    }
    allX.push(...pts.map((p) => p[0]));
    allY.push(...pts.map((p) => p[1]));
    return { pts, trend };
  });
  if (allX.length === 0) {
    warnings.push('rewards: no data rows, rendering empty axes');
  }
  const [x, y] = xyScales(extent(allX), extent(allY));
  let svg = open('training rewards') + axes(x, y, 'time [s]', 'per-hop reward');
  prepared.forEach(({ pts, trend }, i) => {
    const color = PALETTE[i % PALETTE.length];
    const stride = Math.max(1, Math.ceil(pts.length / 3000));
    for (let k = 0; k < pts.length; k += stride) {
      svg += `<circle cx="${fmt(x(pts[k][0]))}" cy="${fmt(y(pts[k][1]))}" r="1" fill="${color}" fill-opacity="0.25"/>\n`;
    }
    svg += polyline(trend.map(([px, py]) => [x(px), y(py)] as [number, number]), color, 2);
  });
  svg += legend(labels) + CLOSE;
  return { svg, warnings };
}

/** Square cell grid shared by the two matrix kinds. */
function matrixFigure(
  title: string,
  axisLabel: string,
  barLabel: string,
  ids: number[],
  cells: Map<string, number>,
  lo: number,
  hi: number,
  warnings: string[],
): Rendered {
  const side = Math.min(PLOT_W, PLOT_H);
  const left = MARGIN.left;
  const top = MARGIN.top;
  const n = ids.length;
  const index = new Map(ids.map((id, i) => [id, i]));
  const cell = n > 0 ? side / n : side;
  let svg = open(title);
  svg += `<rect x="${left}" y="${top}" width="${fmt(side)}" height="${fmt(side)}" fill="none" stroke="#444"/>\n`;
  if (n === 0) {
    warnings.push(`${title}: no data rows, rendering empty axes`);
  }
  for (const [key, value] of cells) {
    const [a, b] = key.split(',').map(Number);
    const i = index.get(a);
    const j = index.get(b);
    if (i === undefined || j === undefined) continue;
    const t = hi > lo ? (value - lo) / (hi - lo) : 1;
    svg +=
      `<rect x="${fmt(left + j * cell)}" y="${fmt(top + i * cell)}" ` +
      `width="${fmt(cell)}" height="${fmt(cell)}" fill="${heatColor(t)}"/>\n`;
  }
  const label = (v: string, px: number, py: number, anchor: string, rot = '') =>
    `<text x="${fmt(px)}" y="${fmt(py)}" font-size="11" text-anchor="${anchor}" fill="#333"${rot}>${esc(v)}</text>\n`;
  if (n > 0) {
    // first/last ids are enough orientation; per-row labels would collide
    svg += label(String(ids[0]), left - 6, top + cell / 2 + 4, 'end');
    svg += label(String(ids[n - 1]), left - 6, top + side - cell / 2 + 4, 'end');
    svg += label(String(ids[0]), left + cell / 2, top + side + 16, 'middle');
    svg += label(String(ids[n - 1]), left + side - cell / 2, top + side + 16, 'middle');
  }
  svg += `<text x="${fmt(left + side / 2)}" y="${top + side + 36}" font-size="13" text-anchor="middle" fill="#222">${esc(axisLabel)}</text>\n`;
  svg +=
    `<text x="20" y="${fmt(top + side / 2)}" font-size="13" text-anchor="middle" fill="#222" ` +
    `transform="rotate(-90 20 ${fmt(top + side / 2)})">${esc(axisLabel)}</text>\n`;
  svg += colorbar(lo, hi, barLabel);
  svg += CLOSE;
  return { svg, warnings };
}

function heatmap(tables: Table[]): Rendered {
  const rows = tables[0].rows;
  const cells = new Map<string, number>();
  const idSet = new Set<number>();
  let maxCount = 0;
  for (const r of rows) {
    const a = num(r, 'node_a');
    const b = num(r, 'node_b');
    const c = num(r, 'packets');
    idSet.add(a);
    idSet.add(b);
    if (c > maxCount) maxCount = c;
    cells.set(`${a},${b}`, c);
  }
  const norm = new Map<string, number>();
  for (const [k, v] of cells) norm.set(k, maxCount > 0 ? (100 * v) / maxCount : 0);
  const ids = [...idSet].sort((x, y) => x - y);
  return matrixFigure('link load heat map', 'node id', 'load [% of max]', ids, norm, 0, 100, []);
}

function ckaMatrix(tables: Table[]): Rendered {
  const rows = tables[0].rows;
  const cells = new Map<string, number>();
  const idSet = new Set<number>();
  for (const r of rows) {
    const i = num(r, 'agent_i');
    const j = num(r, 'agent_j');
    const v = num(r, 'value');
    idSet.add(i);
    idSet.add(j);
    cells.set(`${i},${j}`, v);
    cells.set(`${j},${i}`, v);
  }
  const ids = [...idSet].sort((x, y) => x - y);
  // similarity lives on a fixed [0, 1] scale so runs are comparable
  return matrixFigure('model similarity matrix', 'agent', 'CKA', ids, cells, 0, 1, []);
}

function topology(tables: Table[]): Rendered {
  const warnings: string[] = [];
  const edges = tables[0].rows;
  const nodes = tables[1].rows;
  const pos = new Map<number, { lon: number; lat: number; kind: string; name: string }>();
  for (const r of nodes) {
    pos.set(num(r, 'node_id'), {
      lon: num(r, 'lon_deg'),
      lat: num(r, 'lat_deg'),
      kind: r['kind'],
      name: r['name'],
    });
  }
  if (nodes.length === 0) {
    warnings.push('topology: no data rows, rendering empty axes');
  }
  const [x, y] = xyScales([-180, 180], [-90, 90]);
  let svg = open('constellation topology') + axes(x, y, 'longitude [deg]', 'latitude [deg]');
  const styles: Record<string, string> = {
    intra: 'stroke="#9db4c8" stroke-width="0.8"',
    inter: 'stroke="#c9b59d" stroke-width="0.8"',
    gsl: 'stroke="#d1483a" stroke-width="1.6"',
  };
  let missing = 0;
  for (const e of edges) {
    const a = pos.get(num(e, 'node_a'));
    const b = pos.get(num(e, 'node_b'));
    if (!a || !b) {
      missing += 1;
      continue;
    }
    // skip the wrap-around segment instead of drawing across the whole map
    if (Math.abs(a.lon - b.lon) > 180) continue;
    const style = styles[e['kind']] ?? 'stroke="#888" stroke-width="0.8"';
    svg += `<line x1="${fmt(x(a.lon))}" y1="${fmt(y(a.lat))}" x2="${fmt(x(b.lon))}" y2="${fmt(y(b.lat))}" ${style}/>\n`;
  }
  if (missing > 0) {
    warnings.push(`topology: ${missing} edges reference nodes not present in the node list`);
  }
  for (const [, p] of [...pos.entries()].sort((a, b) => a[0] - b[0])) {
    if (p.kind === 'gw') {
      svg +=
        `<rect x="${fmt(x(p.lon) - 4)}" y="${fmt(y(p.lat) - 4)}" width="8" height="8" fill="#d1483a"/>\n` +
        `<text x="${fmt(x(p.lon) + 7)}" y="${fmt(y(p.lat) + 4)}" font-size="11" fill="#8a2620">${esc(p.name)}</text>\n`;
    } else {
      svg += `<circle cx="${fmt(x(p.lon))}" cy="${fmt(y(p.lat))}" r="2.2" fill="#1f6fb4"/>\n`;
    }
  }
  svg += CLOSE;
  return { svg, warnings };
}

export function render(kind: PlotKind, tables: Table[], labels: string[]): Rendered {
  switch (kind) {
    case 'latency_trace':
      return latencyTrace(tables, labels);
    case 'cdf':
      return cdf(tables, labels);
    case 'heatmap':
      return heatmap(tables);
    case 'rewards':
      return rewards(tables, labels);
    case 'cka_matrix':
      return ckaMatrix(tables);
    case 'cka_cdf':
      return ckaCdf(tables, labels);
    case 'topology':
      return topology(tables);
  }
}
