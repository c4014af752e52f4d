import init, { simulateField, periodogramGrid, densitySlice } from "./pkg/latspec_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

function params() {
  return {
    kind: $("kind").value,
    n: Number($("n").value),
    seed: BigInt($("seed").value),
    phi: Number($("phi").value),
  };
}

function guarded(fn) {
  return () => {
    status.textContent = "";
    try {
      fn();
    } catch (e) {
      status.textContent = e.message ?? String(e);
    }
  };
}

// Blue-white-red for signed values, greyscale when `signed` is false.
function heatmap(canvas, values, n, signed) {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const scale = signed ? Math.max(Math.abs(lo), Math.abs(hi)) || 1 : (hi - lo) || 1;
  const img = new ImageData(n, n);
  values.forEach((v, i) => {
    let r, g, b;
    if (signed) {
      const x = v / scale;
      r = x > 0 ? 255 : 255 * (1 + x);
      b = x < 0 ? 255 : 255 * (1 - x);
      g = 255 * (1 - Math.abs(x));
    } else {
      r = g = b = 255 * (v - lo) / scale;
    }
    img.data.set([r, g, b, 255], 4 * i);
  });
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function drawField() {
  const p = params();
  heatmap($("field"), simulateField(p.kind, p.n, p.seed, p.phi), p.n, true);
}

function drawPeriodogram() {
  const p = params();
  const grid = periodogramGrid(p.kind, p.n, p.seed, p.phi);
  heatmap($("pgram"), grid.map((v) => Math.log(v + 1e-12)), p.n, false);
}

function drawSlice() {
  const p = params();
  const points = 200;
  const out = densitySlice(p.kind, Number($("t2").value), Number($("sn").value), points, p.phi);
  const exact = out.slice(0, points), smoothed = out.slice(points);
  const canvas = $("density"), ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  const hi = Math.max(...exact, ...smoothed) * 1.05 || 1;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 5, w - pad - 5, h - pad - 5);
  ctx.fillStyle = "#000";
  ctx.fillText("-pi", pad, h - 10);
  ctx.fillText("pi", w - 20, h - 10);
  ctx.fillText(hi.toPrecision(2), 2, 14);
  const x = (k) => pad + (w - pad - 5) * k / points;
  const y = (v) => h - pad - (h - pad - 5) * v / hi;
  for (const [series, dash] of [[exact, []], [smoothed, [5, 4]]]) {
    ctx.beginPath();
    ctx.setLineDash(dash);
    ctx.strokeStyle = dash.length ? "#c40" : "#036";
    series.forEach((v, k) => (k ? ctx.lineTo(x(k), y(v)) : ctx.moveTo(x(k), y(v))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

await init();
$("draw").onclick = guarded(drawField);
$("pg").onclick = guarded(drawPeriodogram);
$("slice").onclick = guarded(drawSlice);
guarded(drawField)();
guarded(drawPeriodogram)();
guarded(drawSlice)();
