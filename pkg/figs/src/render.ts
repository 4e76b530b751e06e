import { writeFileSync } from "fs";

import { CsvError, numericColumn, readTable, Table } from "./csv.js";
import { FigureSpec, REQUIRED_COLUMNS } from "./figspec.js";
import { logLogSlope } from "./fit.js";
import { renderChart, Series } from "./svg.js";

function groupKeys(table: Table, cols: string[]): string[] {
  const keys = new Set<string>();
  for (const row of table.rows) keys.add(cols.map((c) => String(row[c])).join("|"));
  return [...keys].sort();
}

function rowsWhere(table: Table, cols: string[], key: string): Record<string, number | string>[] {
  return table.rows.filter((row) => cols.map((c) => String(row[c])).join("|") === key);
}

function radialIntegrand(table: Table, spec: FigureSpec): string {
  const r = numericColumn(table, "r");
  const series: Series[] = [
    { label: "single-atom density", x: r, y: numericColumn(table, "C1") },
    { label: "entangling density", x: r, y: numericColumn(table, "C2") },
  ];
  return renderChart(series, {
    title: spec.title ?? "Radial curvature densities",
    xLabel: "r",
    yLabel: "density",
    width: spec.width,
    height: spec.height,
  });
}

/** Fitted log-log slopes of 1 - F against the error amplitude, per radius. */
export function errorScalingSlopes(table: Table): Map<string, number> {
  const slopes = new Map<string, number>();
  for (const key of groupKeys(table, ["R"])) {
    const rows = rowsWhere(table, ["R"], key);
    const eps = rows.map((r) => r["epsilon"] as number);
    const infid = rows.map((r) => 1 - (r["F_exact"] as number));
    slopes.set(key, logLogSlope(eps, infid));
  }
  return slopes;
}

function errorScaling(table: Table, spec: FigureSpec): string {
  const slopes = errorScalingSlopes(table);
  const series: Series[] = [];
  const annotations: string[] = [];
  for (const key of groupKeys(table, ["R"])) {
    const rows = rowsWhere(table, ["R"], key);
    series.push({
      label: `R = ${key}`,
      x: rows.map((r) => r["epsilon"] as number),
      y: rows.map((r) => 1 - (r["F_exact"] as number)),
      markers: true,
    });
    annotations.push(`slope(R=${key}) = ${slopes.get(key)!.toFixed(2)}`);
  }
  return renderChart(series, {
    title: spec.title ?? "Coherent-error scaling",
    xLabel: "relative amplitude error",
    yLabel: "1 - F",
    logx: true,
    logy: true,
    annotations,
    width: spec.width,
    height: spec.height,
  });
}

function timeSweep(table: Table, spec: FigureSpec): string {
  const series: Series[] = [];
  for (const key of groupKeys(table, ["gamma", "t2"])) {
    const rows = rowsWhere(table, ["gamma", "t2"], key).sort(
      (a, b) => (a["T"] as number) - (b["T"] as number)
    );
    const [gamma, t2] = key.split("|");
    series.push({
      label: `gamma=${gamma} t2=${t2}`,
      x: rows.map((r) => r["T"] as number),
      y: rows.map((r) => r["fidelity"] as number),
      markers: true,
    });
  }
  return renderChart(series, {
    title: spec.title ?? "Gate fidelity vs protocol time",
    xLabel: "protocol time T",
    yLabel: "fidelity",
    logx: spec.logx ?? true,
    width: spec.width,
    height: spec.height,
  });
}

function gapCurve(table: Table, spec: FigureSpec): string {
  const w = numericColumn(table, "W");
  const series: Series[] = [
    { label: "gap on the arc", x: w, y: numericColumn(table, "gap_arc"), markers: true },
    { label: "large-W closed form", x: w, y: numericColumn(table, "asymptotic_gap"), dashed: true },
  ];
  return renderChart(series, {
    title: spec.title ?? "Spectral gap vs blockade strength",
    xLabel: "W",
    yLabel: "gap",
    logx: spec.logx ?? true,
    width: spec.width,
    height: spec.height,
  });
}

function loopDiagram(table: Table, spec: FigureSpec): string {
  const series: Series[] = [
    { label: "drive profile", x: numericColumn(table, "re"), y: numericColumn(table, "im") },
  ];
  return renderChart(series, {
    title: spec.title ?? "Drive loop in the complex plane",
    xLabel: "Re f",
    yLabel: "Im f",
    equalAspect: true,
    width: spec.width,
    height: spec.height,
  });
}

const RENDERERS: Record<string, (table: Table, spec: FigureSpec) => string> = {
  "radial-integrand": radialIntegrand,
  "error-scaling": errorScaling,
  "time-sweep": timeSweep,
  "gap-curve": gapCurve,
  "loop-diagram": loopDiagram,
};

/** Render one validated figure spec; returns the SVG text it wrote. */
export function renderFigure(spec: FigureSpec): string {
  const table = readTable(spec.input, REQUIRED_COLUMNS[spec.kind]);
  const svg = RENDERERS[spec.kind](table, spec);
  writeFileSync(spec.output, svg + "\n");
  return svg;
}

export { CsvError };
