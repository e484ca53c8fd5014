import init, {
  DemoPassage, pick_peaks, score_peaks, matched_peaks, focal_curve, uncertainty_curve, min_peak_distance,
} from "./pkg/axledet_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function showValues(fieldset) {
  for (const input of fieldset.querySelectorAll("input")) {
    input.nextElementSibling.value = input.value;
  }
}

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function polyline(ctx, values, lo, hi, color, box) {
  const { x0, y0, w, h } = box;
  ctx.strokeStyle = color;
  ctx.beginPath();
  values.forEach((v, i) => {
    const x = x0 + (i / Math.max(values.length - 1, 1)) * w;
    const y = y0 + h - ((v - lo) / (hi - lo || 1)) * h;
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function ticks(ctx, indices, n, color, top, bottom) {
  ctx.strokeStyle = color;
  for (const i of indices) {
    const x = (i / Math.max(n - 1, 1)) * ctx.canvas.width;
    ctx.beginPath();
    ctx.moveTo(x, top);
    ctx.lineTo(x, bottom);
    ctx.stroke();
  }
}

// viridis-like ramp from dark blue to yellow
function colour(v) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.6 * v - 0.5)));
  const g = Math.round(255 * Math.min(1, 0.1 + 0.9 * v));
  const b = Math.round(255 * Math.max(0, 0.55 - 0.55 * v + 0.25 * Math.sin(Math.PI * v)));
  return [r, g, b];
}

let passage = null;

function buildPassage() {
  showValues($("passage-controls"));
  try {
    passage?.free();
    passage = new DemoPassage(num("velocity"), num("axles"), num("noise"), num("seed"));
    $("passage-info").textContent =
      `${passage.n_samples()} samples in the window, crossings at ${Array.from(passage.crossings()).join(", ")}`;
    $("passage-info").className = "stats";
  } catch (e) {
    passage = null;
    $("passage-info").textContent = String(e);
    $("passage-info").className = "stats error";
    return;
  }
  const select = $("channel");
  if (select.options.length === 0) {
    for (let c = 0; c < passage.n_channels(); c++) {
      select.add(new Option(passage.channel_name(c), String(c)));
    }
  }
  drawPassage();
  drawPeaks();
}

function drawPassage() {
  if (!passage) return;
  const signal = passage.signal();
  const n = signal.length;
  const ctx = clear($("signal"));
  const peak = signal.reduce((m, v) => Math.max(m, Math.abs(v)), 1e-12);
  polyline(ctx, signal, -peak, peak, "#246", { x0: 0, y0: 4, w: ctx.canvas.width, h: ctx.canvas.height - 8 });
  ticks(ctx, passage.crossings(), n, "rgba(200,0,0,.5)", 0, ctx.canvas.height);

  const canvas = $("scalogram");
  const image = passage.channel(Number($("channel").value || 0));
  const scales = passage.n_scales();
  const sc = canvas.getContext("2d");
  const pixels = sc.createImageData(canvas.width, canvas.height);
  for (let y = 0; y < canvas.height; y++) {
    // smallest scale (highest frequency) at the top
    const s = Math.min(scales - 1, Math.floor((y / canvas.height) * scales));
    for (let x = 0; x < canvas.width; x++) {
      const t = Math.min(n - 1, Math.floor((x / canvas.width) * n));
      const [r, g, b] = colour(image[s * n + t]);
      const k = 4 * (y * canvas.width + x);
      pixels.data.set([r, g, b, 255], k);
    }
  }
  sc.putImageData(pixels, 0, 0);
  ticks(sc, passage.crossings(), n, "rgba(255,255,255,.7)", 0, 8);
}

function drawPeaks() {
  showValues($("peak-controls"));
  if (!passage) return;
  const trace = passage.probability_trace(num("jitter"), num("clutter"), num("trace-noise"), num("seed"));
  const truth = passage.crossings();
  const n = trace.length;
  const canvas = $("trace");
  const ctx = clear(canvas);
  const box = { x0: 0, y0: 6, w: canvas.width, h: canvas.height - 12 };
  const yOf = (v) => box.y0 + box.h - v * box.h;

  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(0, yOf(num("min-height")));
  ctx.lineTo(canvas.width, yOf(num("min-height")));
  ctx.stroke();
  ctx.setLineDash([]);
  ticks(ctx, truth, n, "#bbb", 0, canvas.height);
  polyline(ctx, trace, 0, 1, "#246", box);

  let peaks;
  try {
    peaks = pick_peaks(trace, num("min-height"), num("min-distance"), num("min-prominence"));
  } catch (e) {
    $("scores").textContent = String(e);
    $("scores").className = "stats error";
    return;
  }
  const threshold = num("threshold");
  const matched = new Set(matched_peaks(peaks, truth, threshold));
  for (const p of peaks) {
    const x = (p / Math.max(n - 1, 1)) * canvas.width;
    ctx.fillStyle = matched.has(p) ? "#1a7f37" : "#c62828";
    ctx.beginPath();
    ctx.arc(x, yOf(trace[p]), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  const [tp, fp, fn, precision, recall, f1] = score_peaks(peaks, truth, threshold);
  $("scores").className = "stats";
  $("scores").textContent =
    `${peaks.length} peaks: TP ${tp}, FP ${fp}, FN ${fn}; precision ${precision.toFixed(3)}, ` +
    `recall ${recall.toFixed(3)}, F1 ${f1.toFixed(3)}`;
}

function axes(ctx, label) {
  ctx.strokeStyle = "#888";
  ctx.strokeRect(30, 10, ctx.canvas.width - 40, ctx.canvas.height - 40);
  ctx.fillStyle = "#444";
  ctx.fillText(label, 36, 24);
}

function drawCurves() {
  showValues($("curve-controls"));
  const box = (c) => ({ x0: 30, y0: 10, w: c.width - 40, h: c.height - 40 });

  const focal = $("focal");
  const fc = clear(focal);
  axes(fc, "focal loss of a positive sample vs p (grey: gamma 0)");
  const ce = focal_curve(0, 200);
  const fl = focal_curve(num("gamma"), 200);
  const top = Math.min(ce[0], 5);
  polyline(fc, ce.map((v) => Math.min(v, top)), 0, top, "#aaa", box(focal));
  polyline(fc, fl.map((v) => Math.min(v, top)), 0, top, "#c62828", box(focal));

  const unc = $("uncertainty");
  const uc = clear(unc);
  axes(uc, "label uncertainty (m) vs velocity 0 to 60 m/s");
  const u = uncertainty_curve(num("offset"), 60, 200);
  polyline(uc, u, 0, Math.max(u[u.length - 1], 0.5), "#246", box(unc));

  const d = min_peak_distance(num("wheel"), num("vmax"), 600);
  const at57 = uncertainty_curve(num("offset"), 57, 2)[1];
  $("curve-info").textContent =
    `minimum peak distance at 600 Hz: ${d} samples; label uncertainty at 57 m/s: ${at57.toFixed(3)} m`;
}

await init();
for (const id of ["velocity", "axles", "noise", "seed"]) $(id).addEventListener("input", buildPassage);
$("channel").addEventListener("change", drawPassage);
$("peak-controls").addEventListener("input", drawPeaks);
$("curve-controls").addEventListener("input", drawCurves);
buildPassage();
drawCurves();
