import init, { residue_field_points, congruence_sweep, bound_report } from "./pkg/hexpack_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(el, e) {
  el.textContent = String(e);
  el.className = "err";
}

function drawResidues() {
  const info = $("rinfo");
  info.className = "";
  let data;
  try {
    data = JSON.parse(residue_field_points(num("rp"), num("rr")));
  } catch (e) {
    return fail(info, e);
  }
  info.textContent = `${data.kind}, Q = ${data.Q}, t = ${data.t}`;
  const c = $("rcanvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const radius = num("rr");
  const scale = c.width / (2.2 * radius);
  const cx = c.width / 2, cy = c.height / 2;
  const dot = Math.max(1.5, Math.min(6, scale / 3));
  for (const [x, y, cls] of data.points) {
    const px = cx + x * scale, py = cy - y * scale;
    if (px < 0 || py < 0 || px > c.width || py > c.height) continue;
    g.fillStyle = cls === 0 ? "#000" : `hsl(${(360 * cls) / data.Q}, 70%, 55%)`;
    g.beginPath();
    g.arc(px, py, cls === 0 ? dot * 1.4 : dot, 0, 2 * Math.PI);
    g.fill();
  }
  const [tx, ty] = data.t_point;
  g.strokeStyle = "#000";
  g.beginPath();
  g.moveTo(cx, cy);
  g.lineTo(cx + tx * scale, cy - ty * scale);
  g.stroke();
}

function plotSweep() {
  const info = $("sinfo");
  info.className = "";
  let rows;
  try {
    rows = JSON.parse(congruence_sweep(num("sQ"), num("sp"), num("sr"), num("slo"), num("shi"), 400));
  } catch (e) {
    return fail(info, e);
  }
  const c = $("scanvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 50;
  const xs = rows.map((r) => r.log10_y), ys = rows.map((r) => r.lambda);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 1e-6; y1 += 1e-6; }
  const X = (x) => pad + ((x - x0) / (x1 - x0)) * (c.width - 2 * pad);
  const Y = (y) => c.height - pad - ((y - y0) / (y1 - y0)) * (c.height - 2 * pad);
  g.strokeStyle = "#888";
  g.strokeRect(pad, pad, c.width - 2 * pad, c.height - 2 * pad);
  g.fillStyle = "#333";
  g.fillText(`log10 y: ${x0} .. ${x1}`, pad, c.height - 15);
  g.fillText(y1.toPrecision(12), 4, pad - 6);
  g.fillText(y0.toPrecision(12), 4, c.height - pad + 14);
  g.strokeStyle = "#1565c0";
  g.beginPath();
  rows.forEach((r, i) => (i ? g.lineTo : g.moveTo).call(g, X(r.log10_y), Y(r.lambda)));
  g.stroke();
  const best = rows.reduce((a, b) => (b.lambda > a.lambda ? b : a));
  g.fillStyle = "#c62828";
  g.beginPath();
  g.arc(X(best.log10_y), Y(best.lambda), 4, 0, 2 * Math.PI);
  g.fill();
  info.textContent = `max λ ≈ ${best.lambda.toPrecision(13)} at y ≈ ${Math.pow(10, best.log10_y).toExponential(3)} (ℓ = ${best.ell})`;
}

function evaluate() {
  const out = $("bout");
  out.className = "";
  try {
    const y = Number($("by").value);
    const report = JSON.parse(bound_report($("bf").value, num("bQ"), num("bp"), num("br"), y));
    out.textContent = JSON.stringify(report, null, 2);
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("rgo").onclick = drawResidues;
$("sgo").onclick = plotSweep;
$("bgo").onclick = evaluate;
drawResidues();
plotSweep();
evaluate();
