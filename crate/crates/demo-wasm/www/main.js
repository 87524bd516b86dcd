import init, { exp3Regret, zeroSumGap, doublingTrace } from "./pkg/lagbandit_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

// series: [{ name, points: [[x, y], ...] }], optional vertical markers
function plot(canvas, series, markers = []) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.points);
  const xmax = Math.max(...all.map((p) => p[0]));
  const ymax = Math.max(...all.map((p) => p[1])) || 1;
  const sx = (x) => pad + (x / xmax) * (w - 2 * pad);
  const sy = (y) => h - pad - (y / ymax) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText("0", pad - 10, h - pad + 12);
  ctx.fillText(String(xmax), w - pad - 20, h - pad + 12);
  ctx.fillText(ymax.toPrecision(3), 2, pad + 4);

  ctx.strokeStyle = "#ddd";
  for (const m of markers) {
    ctx.beginPath();
    ctx.moveTo(sx(m), pad);
    ctx.lineTo(sx(m), h - pad);
    ctx.stroke();
  }
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    s.points.forEach(([x, y], j) => (j ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.name, w - pad - 120, pad + 14 + 14 * i);
  });
}

const num = (id) => Number(document.getElementById(id).value);

function wire(prefix, action) {
  const msg = document.getElementById(`${prefix}-msg`);
  document.getElementById(`${prefix}-go`).addEventListener("click", () => {
    msg.textContent = "";
    msg.className = "";
    try {
      action(document.getElementById(`${prefix}-plot`), msg);
    } catch (e) {
      msg.textContent = String(e);
      msg.className = "err";
    }
  });
}

await init();

wire("r", (canvas, msg) => {
  const pts = JSON.parse(exp3Regret(num("r-arms"), num("r-T"), num("r-d"), num("r-p"), 1));
  plot(canvas, [
    { name: "regret", points: pts.map((p) => [p.t, p.regret]) },
    { name: "bound", points: pts.map((p) => [p.t, p.bound]) },
  ]);
  const last = pts[pts.length - 1];
  msg.textContent = `regret ${last.regret.toFixed(1)}, bound ${last.bound.toFixed(1)} at T = ${last.t}`;
});

wire("g", (canvas, msg) => {
  const pts = JSON.parse(zeroSumGap(num("g-T"), num("g-p"), num("g-s")));
  plot(canvas, [{ name: "Nash gap", points: pts.map((p) => [p.t, p.gap]) }]);
  msg.textContent = `gap ${pts[pts.length - 1].gap.toFixed(4)} at T = ${pts[pts.length - 1].t}`;
});

wire("t", (canvas, msg) => {
  const tr = JSON.parse(doublingTrace(num("t-T"), num("t-d"), num("t-s")));
  plot(
    canvas,
    [
      { name: "w", points: tr.points.map((p) => [p.t, p.w]) },
      { name: "h", points: tr.points.map((p) => [p.t, p.h]) },
      { name: "restarts", points: tr.points.map((p) => [p.t, p.nu]) },
    ],
    tr.restarts,
  );
  msg.textContent = `${tr.restarts.length} restarts`;
});
