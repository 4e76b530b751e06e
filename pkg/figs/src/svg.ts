/** Minimal SVG chart builder: axes, tick labels, polyline series, legend.
 *
 * Deliberately dependency-free; everything a figure shows is passed in as
 * numbers that already exist in an input file.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color?: string;
  dashed?: boolean;
  markers?: boolean;
}

export interface ChartOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  logx?: boolean;
  logy?: boolean;
  width?: number;
  height?: number;
  annotations?: string[];
  equalAspect?: boolean;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f", "#bcbd22"];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / (n * step0);
  const step = step0 * (err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1);
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) ticks.push(v);
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const decades = Math.log10(hi / lo);
  const mantissas = decades > 3 ? [1] : decades > 1.2 ? [1, 3] : [1, 2, 5];
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    for (const m of mantissas) {
      const v = m * Math.pow(10, e);
      if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) ticks.push(v);
    }
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return Number(v.toPrecision(4)).toString();
}

export function renderChart(series: Series[], opts: ChartOptions = {}): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 440;
  const margin = { left: 70, right: 20, top: opts.title ? 40 : 20, bottom: 52 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const xs = series.flatMap((s) => s.x).filter((v) => (opts.logx ? v > 0 : true));
  const ys = series.flatMap((s) => s.y).filter((v) => (opts.logy ? v > 0 : true));
  if (xs.length === 0 || ys.length === 0) throw new Error("nothing to plot");
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (xLo === xHi) [xLo, xHi] = [xLo - 1, xHi + 1];
  if (yLo === yHi) [yLo, yHi] = [yLo - 1, yHi + 1];
  if (!opts.logx) { const p = 0.04 * (xHi - xLo); xLo -= p; xHi += p; }
  if (!opts.logy) { const p = 0.06 * (yHi - yLo); yLo -= p; yHi += p; }
  if (opts.equalAspect) {
    const xc = (xLo + xHi) / 2;
    const yc = (yLo + yHi) / 2;
    const half = Math.max((xHi - xLo) / plotW, (yHi - yLo) / plotH) / 2;
    xLo = xc - half * plotW; xHi = xc + half * plotW;
    yLo = yc - half * plotH; yHi = yc + half * plotH;
  }

  const sx = (v: number) =>
    margin.left + plotW * (opts.logx ? (Math.log(v) - Math.log(xLo)) / (Math.log(xHi) - Math.log(xLo)) : (v - xLo) / (xHi - xLo));
  const sy = (v: number) =>
    margin.top + plotH * (1 - (opts.logy ? (Math.log(v) - Math.log(yLo)) / (Math.log(yHi) - Math.log(yLo)) : (v - yLo) / (yHi - yLo)));

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (opts.title) {
    parts.push(`<text x="${width / 2}" y="22" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`);
  }

  const xTicks = opts.logx ? logTicks(xLo, xHi) : niceTicks(xLo, xHi);
  const yTicks = opts.logy ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(`<line x1="${px}" y1="${margin.top}" x2="${px}" y2="${margin.top + plotH}" stroke="#e0e0e0"/>`);
    parts.push(`<text x="${px}" y="${margin.top + plotH + 18}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of yTicks) {
    const py = sy(t);
    parts.push(`<line x1="${margin.left}" y1="${py}" x2="${margin.left + plotW}" y2="${py}" stroke="#e0e0e0"/>`);
    parts.push(`<text x="${margin.left - 8}" y="${py + 4}" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`
  );
  if (opts.xLabel) {
    parts.push(
      `<text x="${margin.left + plotW / 2}" y="${height - 10}" text-anchor="middle">${esc(opts.xLabel)}</text>`
    );
  }
  if (opts.yLabel) {
    const yMid = margin.top + plotH / 2;
    parts.push(
      `<text x="16" y="${yMid}" text-anchor="middle" transform="rotate(-90 16 ${yMid})">${esc(opts.yLabel)}</text>`
    );
  }

  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    const pts = s.x
      .map((xv, j) => [xv, s.y[j]] as const)
      .filter(([a, b]) => (!opts.logx || a > 0) && (!opts.logy || b > 0));
    const path = pts.map(([a, b]) => `${sx(a).toFixed(2)},${sy(b).toFixed(2)}`).join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`);
    if (s.markers) {
      for (const [a, b] of pts) {
        parts.push(`<circle cx="${sx(a).toFixed(2)}" cy="${sy(b).toFixed(2)}" r="2.6" fill="${color}"/>`);
      }
    }
  });

  // legend (top-right inside the plot)
  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    const y = margin.top + 16 + 16 * i;
    const x = margin.left + plotW - 160;
    parts.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${x + 28}" y="${y}" class="legend">${esc(s.label)}</text>`);
  });

  (opts.annotations ?? []).forEach((note, i) => {
    parts.push(
      `<text x="${margin.left + 10}" y="${margin.top + 18 + 16 * i}" class="annotation" fill="#333">${esc(note)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
