import init, { profileCurves, planarErrorField, hyperbolicNet } from "./pkg/unigraph_demo.js";

const $ = (id) => document.getElementById(id);

function report(id, fn) {
  try {
    fn();
  } catch (e) {
    $(id).textContent = String(e);
  }
}

function drawProfiles() {
  const r = JSON.parse(profileCurves($("p-alpha").value, +$("p-start").value, +$("p-len").value, 801));
  const c = $("p-canvas").getContext("2d");
  const { width: w, height: h } = c.canvas;
  c.clearRect(0, 0, w, h);
  const lo = Math.min(...r.window, ...r.target, 0);
  const hi = Math.max(...r.window, ...r.target);
  const x = (xi) => ((xi - r.xi[0]) / (r.xi[r.xi.length - 1] - r.xi[0])) * (w - 20) + 10;
  const y = (v) => h - 10 - ((v - lo) / (hi - lo)) * (h - 20);
  for (const [series, colour] of [[r.target, "#999"], [r.window, "#1f5fbf"]]) {
    c.strokeStyle = colour;
    c.lineWidth = 2;
    c.beginPath();
    series.forEach((v, i) => (i ? c.lineTo(x(r.xi[i]), y(v)) : c.moveTo(x(r.xi[i]), y(v))));
    c.stroke();
  }
  $("p-out").textContent = `len · sup|h − h⁰| = ${r.scaled_error.toFixed(6)}`;
}

function drawField() {
  const r = JSON.parse(planarErrorField($("f-alpha").value, +$("f-n").value));
  const c = $("f-canvas").getContext("2d");
  const { width: w } = c.canvas;
  const cell = w / r.side;
  c.clearRect(0, 0, w, w);
  r.errors.forEach((e, k) => {
    const i = k % r.side;
    const j = Math.floor(k / r.side);
    const t = r.max_abs > 0 ? e / r.max_abs : 0;
    const red = t > 0 ? 255 : Math.round(255 * (1 + t));
    const blue = t < 0 ? 255 : Math.round(255 * (1 - t));
    const green = Math.round(255 * (1 - Math.abs(t)));
    c.fillStyle = `rgb(${red},${green},${blue})`;
    c.fillRect(i * cell, w - (j + 1) * cell, Math.ceil(cell), Math.ceil(cell));
  });
  $("f-out").textContent =
    `max |d − euclid| = ${r.max_abs.toFixed(4)}, Ĉ = ${r.c_hat.toFixed(4)}, M = ${r.glue_length}`;
}

function drawNet() {
  const r = JSON.parse(hyperbolicNet(+$("h-r").value, +$("h-eps").value, +$("h-reach").value));
  const c = $("h-canvas").getContext("2d");
  const { width: w } = c.canvas;
  const s = w / 2 - 10;
  const px = ([a, b]) => [w / 2 + s * a, w / 2 - s * b];
  c.clearRect(0, 0, w, w);
  c.strokeStyle = "#bbb";
  c.beginPath();
  c.arc(w / 2, w / 2, s, 0, 2 * Math.PI);
  c.stroke();
  c.strokeStyle = "rgba(31, 95, 191, 0.35)";
  c.lineWidth = 0.6;
  c.beginPath();
  r.points.forEach((p, i) => {
    if (i === 0) return;
    const [x0, y0] = px(p);
    const [x1, y1] = px(r.points[r.parent[i]]);
    c.moveTo(x0, y0);
    c.lineTo(x1, y1);
  });
  c.stroke();
  c.fillStyle = "#222";
  for (const p of r.points) {
    const [x0, y0] = px(p);
    c.fillRect(x0 - 0.7, y0 - 0.7, 1.4, 1.4);
  }
  $("h-out").textContent =
    `${r.points.length} net points, D̂ = ${r.morse_constant.toFixed(3)}, D₁ = ${r.reach.toFixed(3)}, ` +
    `shortcut length ${r.shortcut_length.toFixed(3)}, max degree ${r.max_degree}`;
}

await init();
$("p-run").onclick = () => report("p-out", drawProfiles);
$("f-run").onclick = () => report("f-out", drawField);
$("h-run").onclick = () => report("h-out", drawNet);
report("p-out", drawProfiles);
