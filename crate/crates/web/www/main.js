import init, { time_law_summary, simulate_senile, msd_curve } from "./pkg/senile_web.js";

const $ = (id) => document.getElementById(id);
const int = (id) => Number.parseInt($(id).value, 10);

function model() {
  return { kind: $("model").value, dim: int("dim"), f: $("f").value.trim(), seed: int("seed") };
}

function guarded(action) {
  return () => {
    $("error").textContent = "";
    try {
      action();
    } catch (e) {
      $("error").textContent = e.message ?? String(e);
    }
  };
}

function summarise() {
  const m = model();
  const s = JSON.parse(time_law_summary(m.dim, m.f));
  const lines = [
    `E(T) = ${s.mean}`,
    `E(T^2) = ${s.second_moment}`,
    `P(T odd) = ${s.p_odd.toFixed(6)}`,
    `P(T = 1..5) = ${s.pmf.slice(0, 5).map((p) => p.toFixed(4)).join(", ")}`,
  ];
  for (const [kind, w] of Object.entries(s.walks)) {
    const c = w.senile_diffusion_constant;
    lines.push(`${kind}: ${w.regime}` + (c === undefined ? "" : `, senile constant ${c.toFixed(6)}`));
  }
  $("summary-out").textContent = lines.join("\n");
}

function drawPath() {
  const m = model();
  const { positions, renewals } = JSON.parse(simulate_senile(m.kind, m.dim, m.f, int("horizon"), m.seed));
  const canvas = $("path");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  // first two coordinates; in d = 1 plot position against time
  const pts = positions.map((x, n) => (m.dim === 1 ? [n, x[0]] : [x[0], x[1]]));
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const scale = Math.min(canvas.width / (x1 - x0 + 2), canvas.height / (y1 - y0 + 2));
  const px = (p) => [(p[0] - x0 + 1) * scale, canvas.height - (p[1] - y0 + 1) * scale];
  ctx.strokeStyle = "#36c";
  ctx.beginPath();
  pts.forEach((p, i) => (i === 0 ? ctx.moveTo(...px(p)) : ctx.lineTo(...px(p))));
  ctx.stroke();
  ctx.fillStyle = "#c33";
  ctx.fillRect(...px(pts[pts.length - 1]).map((v) => v - 3), 6, 6);
  const end = positions[positions.length - 1];
  $("path-info").textContent =
    `${renewals.length} runs completed; S_${positions.length - 1} = (${end.join(", ")})`;
}

function drawMsd() {
  const m = model();
  const points = JSON.parse(msd_curve(m.kind, m.dim, m.f, int("paths"), int("max-n"), m.seed));
  const canvas = $("msd-plot");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const top = Math.max(...points.map((p) => Math.max(p.estimate + 2 * p.std_error, p.reference ?? 0))) * 1.1 || 1;
  const lx = (n) => 40 + (Math.log2(n) / Math.max(1, Math.log2(points[points.length - 1].n))) * (canvas.width - 60);
  const ly = (v) => canvas.height - 20 - (v / top) * (canvas.height - 40);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40, 20, canvas.width - 60, canvas.height - 40);
  if (points[0].reference !== null) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.moveTo(40, ly(points[0].reference));
    ctx.lineTo(canvas.width - 20, ly(points[0].reference));
    ctx.stroke();
  }
  ctx.strokeStyle = ctx.fillStyle = "#36c";
  for (const p of points) {
    const x = lx(p.n);
    ctx.beginPath();
    ctx.moveTo(x, ly(p.estimate - 2 * p.std_error));
    ctx.lineTo(x, ly(p.estimate + 2 * p.std_error));
    ctx.stroke();
    ctx.fillRect(x - 2, ly(p.estimate) - 2, 4, 4);
  }
  const rows = points.map((p) => `n = ${p.n}\t${p.estimate.toFixed(4)} ± ${p.std_error.toFixed(4)}`);
  rows.push(points[0].reference === null ? points[0].warning : `limit ${points[0].reference.toFixed(4)}`);
  $("msd-out").textContent = rows.join("\n");
}

await init();
$("summary").addEventListener("click", guarded(summarise));
$("simulate").addEventListener("click", guarded(drawPath));
$("msd").addEventListener("click", guarded(drawMsd));
guarded(summarise)();
