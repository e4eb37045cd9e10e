// Least-squares slope of log10(y) on log10(x), written with the same
// centered accumulation order the simulator uses so the annotated value
// reproduces the run summary bit-for-bit at double precision.

export function fitLogLogSlope(x: number[], y: number[]): number {
  if (x.length !== y.length || x.length < 2) {
    throw new Error("slope fit needs at least two matching points");
  }
  const lx = x.map(Math.log10);
  const ly = y.map(Math.log10);
  let mx = 0;
  let my = 0;
  for (let i = 0; i < lx.length; i++) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.length;
  my /= ly.length;
  let cov = 0;
  let varx = 0;
  for (let i = 0; i < lx.length; i++) {
    cov += (lx[i] - mx) * (ly[i] - my);
    varx += (lx[i] - mx) * (lx[i] - mx);
  }
  return cov / varx;
}
