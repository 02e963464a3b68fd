import init, { Demo, Method } from "./pkg/rcstab_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let demo = null;

function status(text) {
  $("status").textContent = text;
}

// Run after the status line has been painted.
function later(fn) {
  return new Promise((resolve) => setTimeout(() => resolve(fn()), 20));
}

// Space-time field as a heat map, time along x and space along y.
function drawField(canvas, field, steps, n) {
  const ctx = canvas.getContext("2d");
  canvas.width = steps;
  canvas.height = n;
  const img = ctx.createImageData(steps, n);
  for (let t = 0; t < steps; t++) {
    for (let x = 0; x < n; x++) {
      const o = 4 * (x * steps + t);
      const v = t * n + x < field.length ? Math.max(-1, Math.min(1, field[t * n + x] / 3)) : NaN;
      if (Number.isNaN(v)) {
        img.data.set([230, 230, 230, 255], o);
      } else {
        img.data.set([v > 0 ? 255 : 255 * (1 + v), 255 * (1 - Math.abs(v)), v < 0 ? 255 : 255 * (1 - v), 255], o);
      }
    }
  }
  ctx.putImageData(img, 0, 0);
  canvas.style.width = "800px";
  canvas.style.height = `${4 * n}px`;
}

function drawSpectra(canvas, data, window) {
  const bins = window / 2 + 1;
  const hasPred = data.length === 3 * bins;
  const f = data.slice(0, bins);
  const series = [data.slice(bins, 2 * bins)];
  if (hasPred) series.push(data.slice(2 * bins, 3 * bins));
  const logs = series.map((p) => p.slice(1).map((x) => Math.log10(Math.max(x, 1e-300))));
  const top = Math.max(...logs[0]);
  const lo = top - 8;
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const fx = (i) => 40 + ((canvas.width - 50) * i) / (bins - 2);
  const fy = (v) => 10 + ((canvas.height - 40) * (top - Math.max(v, lo))) / (top - lo);
  ["#000", "#d33"].slice(0, logs.length).forEach((color, s) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    logs[s].forEach((v, i) => (i === 0 ? ctx.moveTo(fx(i), fy(v)) : ctx.lineTo(fx(i), fy(v))));
    ctx.stroke();
  });
  ctx.fillStyle = "#000";
  ctx.fillText(`log10 power, ${top.toFixed(1)} to ${lo.toFixed(1)}`, 45, 20);
  ctx.fillText(`frequency ${f[1].toPrecision(2)} to ${f[bins - 1].toPrecision(2)}`, 45, canvas.height - 10);
  ctx.fillStyle = "#d33";
  ctx.fillText(hasPred ? "forecast" : "no full-length forecast", canvas.width - 160, 20);
}

$("simulate").onclick = () => {
  status("simulating...");
  later(() => {
    try {
      demo?.free();
      demo = new Demo(BigInt(num("seed")), num("train-steps"), num("test-steps"));
      drawField($("truth"), demo.truth(), demo.steps(), demo.grid_points());
      $("forecast").getContext("2d").clearRect(0, 0, $("forecast").width, $("forecast").height);
      $("train").disabled = false;
      $("spectrum").disabled = false;
      status(`simulated ${num("train-steps")} training and ${demo.steps()} test steps`);
    } catch (e) {
      status(`error: ${e.message ?? e}`);
    }
  });
};

$("train").onclick = () => {
  status("training...");
  later(() => {
    try {
      const t0 = performance.now();
      const vt = demo.train(Method[$("method").value], num("nodes"), num("beta"), num("beta-t"), BigInt(num("res-seed")));
      drawField($("forecast"), demo.forecast(), demo.steps(), demo.grid_points());
      const secs = ((performance.now() - t0) / 1000).toFixed(1);
      status(`valid time ${vt.toFixed(2)} Lyapunov times (${secs} s)`);
    } catch (e) {
      status(`error: ${e.message ?? e}`);
    }
  });
};

$("spectrum").onclick = () => {
  try {
    drawSpectra($("psd"), demo.spectra(num("window")), num("window"));
  } catch (e) {
    status(`error: ${e.message ?? e}`);
  }
};

await init();
status("ready");
