import { writeFileSync } from "fs";
import { basename } from "path";
import { CsvError, column, readCsv, Table } from "./csv.js";

export interface PlotSpec {
  csvPaths: string[];
  xCol: string;
  yCol: string;
  boundCol: string | null;
  logLog: boolean;
  xLabel: string;
  yLabel: string;
  out: string;
}

export const DEFAULT_SPEC: Omit<PlotSpec, "csvPaths" | "out"> = {
  xCol: "n",
  yCol: "mean",
  boundCol: "bound",
  logLog: true,
  xLabel: "n",
  yLabel: "value",
};

const WIDTH = 640;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 20, top: 20, bottom: 50 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

interface Series {
  label: string;
  color: string;
  points: [number, number][]; // data dots
  bound: [number, number][]; // bound line, possibly empty
}

function pairs(xs: (number | null)[], ys: (number | null)[], logLog: boolean): [number, number][] {
  const out: [number, number][] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (x === null || y === null) continue;
    if (logLog && (x <= 0 || y <= 0)) continue; // not representable on log axes
    out.push([x, y]);
  }
  return out;
}

function loadSeries(spec: PlotSpec): Series[] {
  return spec.csvPaths.map((path, i) => {
    const table: Table = readCsv(path);
    const xs = column(table, spec.xCol);
    const ys = column(table, spec.yCol);
    const points = pairs(xs, ys, spec.logLog);
    let bound: [number, number][] = [];
    if (spec.boundCol && table.columns.includes(spec.boundCol)) {
      bound = pairs(xs, column(table, spec.boundCol), spec.logLog);
    }
    if (points.length === 0) throw new CsvError(path, "no plottable points");
    return {
      label: basename(path).replace(/\.[^.]*$/, ""),
      color: PALETTE[i % PALETTE.length],
      points,
      bound,
    };
  });
}

interface Scale {
  toPixel(v: number): number;
  ticks: number[];
  min: number;
  max: number;
}

function makeScale(values: number[], log: boolean, pixelRange: [number, number]): Scale {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min = log ? min / 2 : min - 1;
    max = log ? max * 2 : max + 1;
  }
  const fwd = (v: number) => (log ? Math.log10(v) : v);
  const lo = fwd(min);
  const hi = fwd(max);
  const pad = 0.04 * (hi - lo);
  const [p0, p1] = pixelRange;
  const toPixel = (v: number) => p0 + ((fwd(v) - (lo - pad)) / (hi - lo + 2 * pad)) * (p1 - p0);
  let ticks: number[];
  if (log) {
    ticks = [];
    for (let e = Math.ceil(lo - pad); e <= Math.floor(hi + pad); e++) ticks.push(10 ** e);
  } else {
    const step = (max - min) / 4;
    ticks = [0, 1, 2, 3, 4].map((k) => min + k * step);
  }
  return { toPixel, ticks, min, max };
}

function fmtTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    const e = Math.round(Math.log10(Math.abs(v)));
    return `1e${e}`;
  }
  return String(Number(v.toPrecision(4)));
}

const px = (v: number) => v.toFixed(2);

/** Build the SVG document for a spec; pure function of the CSV contents. */
export function renderSvg(spec: PlotSpec): string {
  const series = loadSeries(spec);
  const xs = series.flatMap((s) => s.points.map((p) => p[0]).concat(s.bound.map((p) => p[0])));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]).concat(s.bound.map((p) => p[1])));
  const sx = makeScale(xs, spec.logLog, [MARGIN.left, WIDTH - MARGIN.right]);
  const sy = makeScale(ys, spec.logLog, [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" data-x-extent="${sx.min},${sx.max}" ` +
      `data-y-extent="${sy.min},${sy.max}">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // frame
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="black"/>`
  );

  for (const t of sx.ticks) {
    const p = sx.toPixel(t);
    if (p < x0 - 0.5 || p > x1 + 0.5) continue;
    parts.push(`<line x1="${px(p)}" y1="${y0}" x2="${px(p)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${px(p)}" y="${y0 + 18}" font-size="11" text-anchor="middle">${fmtTick(t)}</text>`
    );
  }
  for (const t of sy.ticks) {
    const p = sy.toPixel(t);
    if (p > y0 + 0.5 || p < y1 - 0.5) continue;
    parts.push(`<line x1="${x0 - 5}" y1="${px(p)}" x2="${x0}" y2="${px(p)}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${px(p + 4)}" font-size="11" text-anchor="end">${fmtTick(t)}</text>`
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" font-size="13" text-anchor="middle">` +
      `${spec.xLabel}</text>`
  );
  parts.push(
    `<text x="16" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${(y0 + y1) / 2})">${spec.yLabel}</text>`
  );

  for (const s of series) {
    if (s.bound.length > 1) {
      const d = s.bound
        .map(([x, y], i) => `${i === 0 ? "M" : "L"}${px(sx.toPixel(x))} ${px(sy.toPixel(y))}`)
        .join(" ");
      parts.push(`<path d="${d}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`);
    }
    for (const [x, y] of s.points) {
      parts.push(
        `<circle cx="${px(sx.toPixel(x))}" cy="${px(sy.toPixel(y))}" r="3" fill="${s.color}"/>`
      );
    }
  }

  series.forEach((s, i) => {
    const ly = y1 + 16 + 16 * i;
    parts.push(`<circle cx="${x1 - 180}" cy="${ly - 4}" r="3" fill="${s.color}"/>`);
    parts.push(`<text x="${x1 - 170}" y="${ly}" font-size="10">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Render and write the image; nothing is written when loading fails. */
export function render(spec: PlotSpec): void {
  const svg = renderSvg(spec);
  writeFileSync(spec.out, svg);
}
