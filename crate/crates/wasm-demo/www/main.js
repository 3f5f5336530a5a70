import init, { deviceNames, pCorrectCurve, qaoaLandscape, ghzHistogram } from "./pkg/eqc_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(40, 10);
  ctx.lineTo(40, h - 25);
  ctx.lineTo(w - 10, h - 25);
  ctx.stroke();
}

function drawCurve() {
  const c = $("pc-canvas");
  const ctx = c.getContext("2d");
  const rate = parseFloat($("pc-rate").value);
  $("pc-rate-out").textContent = rate.toFixed(1);
  let ys;
  try {
    ys = pCorrectCurve($("pc-device").value, $("pc-circuit").value, rate, 96);
  } catch (e) {
    $("status").textContent = e.message;
    return;
  }
  axes(ctx, c.width, c.height);
  const lo = Math.min(...ys) - 0.02, hi = Math.max(...ys) + 0.02;
  const x = (i) => 40 + (i / (ys.length - 1)) * (c.width - 50);
  const y = (v) => 10 + (1 - (v - lo) / (hi - lo)) * (c.height - 35);
  ctx.strokeStyle = "#1f5fa8";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ys.forEach((v, i) => (i ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v))));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(hi.toFixed(3), 2, 14);
  ctx.fillText(lo.toFixed(3), 2, c.height - 28);
  ctx.fillText("time since calibration", c.width / 2 - 50, c.height - 8);
}

function drawLandscape() {
  const grid = parseInt($("ql-grid").value, 10);
  $("ql-grid-out").textContent = grid;
  const e = qaoaLandscape(4, grid);
  const c = $("ql-canvas");
  const ctx = c.getContext("2d");
  const lo = Math.min(...e), hi = Math.max(...e);
  const cell = c.width / grid;
  for (let i = 0; i < grid; i++) {
    for (let j = 0; j < grid; j++) {
      const t = (e[i * grid + j] - lo) / (hi - lo || 1);
      const g = Math.round(40 + 215 * t);
      ctx.fillStyle = `rgb(${g},${g},${Math.min(255, g + 30)})`;
      ctx.fillRect(j * cell, i * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
  $("ql-min").textContent = `minimum ${lo.toFixed(3)}, maximum ${hi.toFixed(3)}.`;
}

function drawGhz() {
  for (const k of ["gamma", "beta", "omega"]) $(`gh-${k}-out`).textContent = $(`gh-${k}`).value;
  const n = Math.max(2, Math.min(6, parseInt($("gh-n").value, 10) || 5));
  const counts = ghzHistogram(
    n,
    parseFloat($("gh-gamma").value),
    parseFloat($("gh-beta").value),
    parseFloat($("gh-omega").value),
    4096,
    (Math.random() * 2 ** 31) >>> 0,
  );
  const c = $("gh-canvas");
  const ctx = c.getContext("2d");
  axes(ctx, c.width, c.height);
  const max = Math.max(...counts);
  const bw = (c.width - 50) / counts.length;
  const all = counts.length - 1;
  counts.forEach((v, i) => {
    const h = (v / max) * (c.height - 40);
    ctx.fillStyle = i === 0 || i === all ? "#1f5fa8" : "#c0392b";
    ctx.fillRect(40 + i * bw + 1, c.height - 25 - h, Math.max(1, bw - 2), h);
  });
  const total = counts.reduce((a, b) => a + b, 0);
  const mixed = 1 - (counts[0] + counts[all]) / total;
  $("gh-summary").textContent = `Mixed-parity fraction ${(100 * mixed).toFixed(2)}% (red bars).`;
}

await init();
for (const name of deviceNames()) {
  const o = document.createElement("option");
  o.textContent = name;
  $("pc-device").appendChild(o);
}
$("pc-device").value = "ibmq_manila";
for (const id of ["pc-device", "pc-circuit", "pc-rate"]) $(id).addEventListener("input", drawCurve);
$("ql-grid").addEventListener("input", drawLandscape);
for (const id of ["gh-gamma", "gh-beta", "gh-omega", "gh-n"]) $(id).addEventListener("input", drawGhz);
$("gh-run").addEventListener("click", drawGhz);
$("status").textContent = "";
drawCurve();
drawLandscape();
drawGhz();
