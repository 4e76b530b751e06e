/** Least-squares slope/intercept of y against x. */
export function linearFit(x: number[], y: number[]): { slope: number; intercept: number } {
  if (x.length !== y.length || x.length < 2) {
    throw new Error("fit needs two same-length samples at least");
  }
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

/** Slope of log(y) against log(x); inputs must be positive. */
export function logLogSlope(x: number[], y: number[]): number {
  const pairs = x.map((xi, i) => [xi, y[i]] as const).filter(([a, b]) => a > 0 && b > 0);
  if (pairs.length < 2) {
    throw new Error("log-log fit needs at least two positive samples");
  }
  return linearFit(
    pairs.map(([a]) => Math.log(a)),
    pairs.map(([, b]) => Math.log(b))
  ).slope;
}
