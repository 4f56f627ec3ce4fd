// Demo page wiring: one Session per built instance, three views.
// Build the wasm package first (see README):
//   wasm-pack build crates/wasm --target web --out-dir ../../www/pkg

import init, { Session } from "./pkg/heatsparse_wasm.js";

const $ = (id) => document.getElementById(id);
const errorBox = $("error");

let session = null;
let layout = null;

function showError(message) {
  errorBox.textContent = String(message);
  errorBox.style.display = "block";
}

function clearError() {
  errorBox.style.display = "none";
}

function sessionConfig() {
  const kind = $("graph-kind").value;
  const a = Number($("dim-a").value);
  const b = Number($("dim-b").value);
  const p = Number($("er-p").value);
  let graph;
  if (kind === "grid") graph = { kind, rows: a, cols: b };
  else if (kind === "erdos_renyi") graph = { kind, n: a, p, seed: 1 };
  else graph = { kind, n: a };
  return {
    graph,
    support_size: Number($("support-size").value),
    support_seed: Number($("support-seed").value),
    signal_seed: Number($("signal-seed").value),
  };
}

// ---- drawing helpers -------------------------------------------------------

function clearCanvas(ctx) {
  ctx.fillStyle = "#0d1117";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

// diverging blue → dark → red scale for h ∈ [-1, 1]
function divergingColor(v) {
  const x = Math.max(-1, Math.min(1, v));
  if (x >= 0) {
    const k = Math.pow(x, 0.6);
    return `rgb(${40 + 215 * k}, ${60 + 40 * (1 - k)}, ${70 * (1 - k) + 20})`;
  }
  const k = Math.pow(-x, 0.6);
  return `rgb(${20 + 50 * (1 - k)}, ${90 + 60 * (1 - k)}, ${120 + 135 * k})`;
}

function vertexXY(canvas, idx) {
  const [px, py] = layout.positions[idx];
  return [px * canvas.width, py * canvas.height];
}

// ---- feasibility panel -----------------------------------------------------

function drawFeasibility() {
  const canvas = $("feas-canvas");
  const ctx = canvas.getContext("2d");
  clearCanvas(ctx);
  const sweep = JSON.parse(session.feasibility_json(220));
  const pts = sweep.points;
  const tStar = sweep.t_star;

  const margin = { l: 46, r: 12, t: 12, b: 30 };
  const W = canvas.width - margin.l - margin.r;
  const H = canvas.height - margin.t - margin.b;
  const tMin = pts[0].t;
  const tMax = pts[pts.length - 1].t;
  const X = (t) => margin.l + (Math.log(t / tMin) / Math.log(tMax / tMin)) * W;
  const yMax = 1.25;
  const Y = (v) => margin.t + H - (Math.max(0, Math.min(yMax, v)) / yMax) * H;

  // feasible region shading
  ctx.fillStyle = "rgba(63, 185, 80, 0.10)";
  ctx.fillRect(margin.l, margin.t, X(Math.min(tStar, tMax)) - margin.l, H);

  // axes
  ctx.strokeStyle = "#2b3340";
  ctx.lineWidth = 1;
  ctx.strokeRect(margin.l, margin.t, W, H);
  ctx.fillStyle = "#8b97a5";
  ctx.font = "11px system-ui";
  for (const v of [0, 0.25, 0.5, 0.75, 1.0, 1.25]) {
    ctx.fillText(v.toFixed(2), 8, Y(v) + 4);
    ctx.strokeStyle = "#1c232d";
    ctx.beginPath();
    ctx.moveTo(margin.l, Y(v));
    ctx.lineTo(margin.l + W, Y(v));
    ctx.stroke();
  }
  ctx.fillText("t (log)", margin.l + W / 2 - 14, canvas.height - 8);

  const series = [
    { key: "cond1_lhs", color: "#f8a04e", dash: [] },
    { key: "cond1_rhs", color: "#f8a04e", dash: [5, 4] },
    { key: "cond2_lhs", color: "#58a6ff", dash: [] },
    { key: "cond2_rhs", color: "#58a6ff", dash: [5, 4] },
  ];
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash);
    ctx.lineWidth = 1.7;
    ctx.beginPath();
    pts.forEach((p, i) => {
      const x = X(p.t);
      const y = Y(p[s.key]);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);

  // T* marker
  if (tStar > tMin && tStar < tMax) {
    ctx.strokeStyle = "#3fb950";
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    ctx.moveTo(X(tStar), margin.t);
    ctx.lineTo(X(tStar), margin.t + H);
    ctx.stroke();
    ctx.fillStyle = "#3fb950";
    ctx.fillText("T*", X(tStar) + 4, margin.t + 14);
  }

  // legend
  const legend = [
    ["condition 1: (J−1)(2et/D)^{D/2}  (solid) vs diagonal lower bound (dashed)", "#f8a04e"],
    ["condition 2: ζ- and D/2-decay sum (solid) vs remaining margin (dashed)", "#58a6ff"],
  ];
  legend.forEach(([text, color], i) => {
    ctx.fillStyle = color;
    ctx.fillText(text, margin.l + 8, margin.t + 16 + 14 * i);
  });

  $("feas-readout").textContent =
    `T* = ${tStar.toExponential(4)}   ζ = ${layout.zeta.toFixed(4)}   ` +
    `D = ${Number.isFinite(layout.d_min) ? layout.d_min.toFixed(4) : "∞"}   ` +
    `‖Δ‖ = ${layout.op_norm.toFixed(3)}   λ = ${layout.spectral_gap.toFixed(3)}`;
}

// ---- certificate panel -----------------------------------------------------

function drawCertificate() {
  const canvas = $("cert-canvas");
  const ctx = canvas.getContext("2d");
  clearCanvas(ctx);
  const frac = Number($("cert-frac").value);
  $("cert-frac-label").textContent = frac.toFixed(2);

  let cert;
  try {
    cert = JSON.parse(session.certificate_json(frac));
  } catch (e) {
    $("cert-readout").innerHTML = `<b class="fail">certificate failed:</b> ${e}`;
    return;
  }

  // edges
  ctx.strokeStyle = "#2b3340";
  ctx.lineWidth = 1;
  for (const [u, v] of layout.edges) {
    const [x1, y1] = vertexXY(canvas, u);
    const [x2, y2] = vertexXY(canvas, v);
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    ctx.stroke();
  }

  const supportSet = new Set(cert.support);
  const radius = Math.max(6, Math.min(13, 230 / layout.n));
  cert.values.forEach((h, v) => {
    const [x, y] = vertexXY(canvas, v);
    ctx.beginPath();
    ctx.arc(x, y, radius, 0, Math.PI * 2);
    ctx.fillStyle = divergingColor(h);
    ctx.fill();
    if (supportSet.has(v)) {
      ctx.strokeStyle = "#e8edf2";
      ctx.lineWidth = 2.2;
      ctx.stroke();
    }
  });

  // sign labels on the support
  ctx.fillStyle = "#e8edf2";
  ctx.font = "bold 11px system-ui";
  cert.support.forEach((v, slot) => {
    const [x, y] = vertexXY(canvas, v);
    ctx.fillText(cert.signs[slot] > 0 ? "+" : "−", x - 3, y - radius - 4);
  });

  const verdict = cert.interpolates && cert.strictly_interior && cert.unit_sup;
  $("cert-readout").innerHTML =
    `t = ${cert.t.toExponential(4)}   ‖h‖∞ = ${cert.sup_norm.toFixed(6)}   ` +
    `max off-support |h| = ${cert.off_support_max.toFixed(6)}   ` +
    `interior margin = ${cert.interior_margin.toFixed(6)}\n` +
    (verdict
      ? `<b class="ok">certificate verifies: interpolation ✓, strictly interior ✓, unit sup ✓</b>`
      : `<b class="fail">certificate fails beyond the guarantee: ` +
        `interpolation ${cert.interpolates ? "✓" : "✗"}, ` +
        `interior ${cert.strictly_interior ? "✓" : "✗"}, ` +
        `unit sup ${cert.unit_sup ? "✓" : "✗"}</b>`);
}

// ---- recovery panel --------------------------------------------------------

function drawRecovery() {
  const canvas = $("rec-canvas");
  const ctx = canvas.getContext("2d");
  clearCanvas(ctx);
  const eps = Number($("rec-eps").value);
  const seed = Number($("rec-seed").value);
  const frac = Number($("cert-frac").value);
  $("rec-eps-label").textContent = eps.toFixed(3);

  let rec;
  try {
    rec = JSON.parse(session.recover_json(Math.min(frac, 0.99), eps, BigInt(seed)));
  } catch (e) {
    $("rec-readout").innerHTML = `<b class="fail">recovery failed:</b> ${e}`;
    return;
  }

  const margin = { l: 40, r: 10, t: 10, b: 24 };
  const W = canvas.width - margin.l - margin.r;
  const H = canvas.height - margin.t - margin.b;
  const n = rec.g_true.length;
  const maxAbs = Math.max(
    0.2,
    ...rec.g_true.map(Math.abs),
    ...rec.g_hat.map(Math.abs),
    ...rec.observed.map(Math.abs)
  );
  const X = (v) => margin.l + ((v + 0.5) / n) * W;
  const Y = (val) => margin.t + H / 2 - (val / maxAbs) * (H / 2 - 6);

  // zero line and frame
  ctx.strokeStyle = "#2b3340";
  ctx.strokeRect(margin.l, margin.t, W, H);
  ctx.beginPath();
  ctx.moveTo(margin.l, Y(0));
  ctx.lineTo(margin.l + W, Y(0));
  ctx.stroke();
  ctx.fillStyle = "#8b97a5";
  ctx.font = "11px system-ui";
  ctx.fillText("vertex", margin.l + W / 2 - 16, canvas.height - 6);
  ctx.fillText(maxAbs.toFixed(2), 6, Y(maxAbs) + 10);
  ctx.fillText((-maxAbs).toFixed(2), 6, Y(-maxAbs) - 2);

  // observation dots
  ctx.fillStyle = "rgba(139, 151, 165, 0.65)";
  rec.observed.forEach((v, i) => {
    ctx.beginPath();
    ctx.arc(X(i), Y(v), 2.2, 0, Math.PI * 2);
    ctx.fill();
  });

  // true spikes: hollow stems
  ctx.strokeStyle = "#3fb950";
  ctx.lineWidth = 2;
  rec.g_true.forEach((v, i) => {
    if (v === 0) return;
    ctx.beginPath();
    ctx.moveTo(X(i) - 4, Y(v));
    ctx.lineTo(X(i) + 4, Y(v));
    ctx.moveTo(X(i), Y(0));
    ctx.lineTo(X(i), Y(v));
    ctx.stroke();
  });

  // recovered: filled stems
  ctx.strokeStyle = "#58a6ff";
  ctx.fillStyle = "#58a6ff";
  ctx.lineWidth = 1.4;
  rec.g_hat.forEach((v, i) => {
    if (Math.abs(v) < 1e-9) return;
    ctx.beginPath();
    ctx.moveTo(X(i), Y(0));
    ctx.lineTo(X(i), Y(v));
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(X(i), Y(v), 3.4, 0, Math.PI * 2);
    ctx.fill();
  });

  $("rec-readout").innerHTML =
    `t = ${rec.t.toExponential(4)}   ε = ${rec.eps.toFixed(3)}   ` +
    `residual = ${rec.residual.toExponential(3)}   iterations = ${rec.iterations}\n` +
    `‖ĝ − g‖₁ = ${rec.err_l1.toExponential(4)}   budget 4(1+δ)√J·ε = ${rec.bound_l1.toExponential(4)}   ` +
    (rec.bound_held
      ? `<b class="ok">bound holds</b>`
      : `<b class="fail">bound violated</b>`);
}

// ---- wiring ----------------------------------------------------------------

function rebuild() {
  clearError();
  try {
    session = new Session(JSON.stringify(sessionConfig()));
    layout = JSON.parse(session.layout_json());
    drawFeasibility();
    drawCertificate();
    drawRecovery();
  } catch (e) {
    showError(e);
  }
}

function redrawDependent() {
  if (!session) return;
  try {
    drawCertificate();
    drawRecovery();
  } catch (e) {
    showError(e);
  }
}

init().then(() => {
  $("rebuild").addEventListener("click", rebuild);
  $("graph-kind").addEventListener("change", () => {
    const kind = $("graph-kind").value;
    $("dim-b").disabled = kind !== "grid";
    $("er-p").disabled = kind !== "erdos_renyi";
  });
  $("cert-frac").addEventListener("input", redrawDependent);
  $("rec-eps").addEventListener("input", drawRecoverySafe);
  $("rec-seed").addEventListener("change", drawRecoverySafe);
  function drawRecoverySafe() {
    if (!session) return;
    try {
      drawRecovery();
    } catch (e) {
      showError(e);
    }
  }
  $("dim-b").disabled = false;
  $("er-p").disabled = true;
  rebuild();
}).catch(showError);
