import init, { Demo, spread_curve, mixing_curve } from "./pkg/mobgossip_wasm.js";

const $ = (id) => document.getElementById(id);
let demo = null;
let playing = false;

function params() {
  return [
    Number($("n").value), Number($("k").value), Number($("v").value),
    $("protocol").value, $("phy").value, $("mobility").value,
    Number($("late").value), BigInt($("seed").value),
  ];
}

function shade(f) {
  // light grey to dark blue as the node learns more messages
  const a = [221, 221, 221], b = [8, 48, 107];
  const c = a.map((x, i) => Math.round(x + (b[i] - x) * f));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function drawWorld() {
  const cv = $("world"), g = cv.getContext("2d"), W = cv.width;
  g.clearRect(0, 0, W, W);
  const s = demo.grid_side();
  g.strokeStyle = "#eee";
  for (let i = 1; i < s; i++) {
    const p = (i / s) * W;
    g.beginPath(); g.moveTo(p, 0); g.lineTo(p, W); g.moveTo(0, p); g.lineTo(W, p); g.stroke();
  }
  const pos = demo.positions(), know = demo.knowledge(), tr = demo.transfers();
  for (let i = 0; i < tr.length; i += 3) {
    const a = tr[i], b = tr[i + 1];
    g.strokeStyle = tr[i + 2] ? "#2ca02c" : "#d62728";
    g.beginPath();
    g.moveTo(pos[2 * a] * W, (1 - pos[2 * a + 1]) * W);
    g.lineTo(pos[2 * b] * W, (1 - pos[2 * b + 1]) * W);
    g.stroke();
  }
  for (let i = 0; i < know.length; i++) {
    g.fillStyle = shade(know[i]);
    g.beginPath();
    g.arc(pos[2 * i] * W, (1 - pos[2 * i + 1]) * W, 3, 0, 2 * Math.PI);
    g.fill();
  }
  const holders = demo.holders(), n = Number($("n").value);
  const done = holders.filter((h) => h === n).length;
  $("status").textContent = `slot ${demo.slot()}  complete ${done}/${holders.length}` + (demo.done() ? "  (done)" : "");
  drawBars(holders, n);
}

function drawBars(holders, n) {
  const cv = $("bars"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const w = cv.width / holders.length;
  holders.forEach((h, i) => {
    const hgt = (h / n) * (cv.height - 14);
    g.fillStyle = h === n ? "#08306b" : "#6baed6";
    g.fillRect(i * w + 1, cv.height - hgt, Math.max(1, w - 2), hgt);
  });
  g.fillStyle = "#555";
  g.fillText("holders per message", 4, 11);
}

function reset() {
  try {
    demo = new Demo(...params());
    drawWorld();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function frame() {
  if (!playing || !demo) return;
  demo.step(Number($("speed").value));
  drawWorld();
  if (demo.done()) { playing = false; $("play").textContent = "Play"; return; }
  requestAnimationFrame(frame);
}

function plotLines(cv, series, yMax, hline) {
  const g = cv.getContext("2d"), W = cv.width, H = cv.height, L = 44, B = 24;
  g.clearRect(0, 0, W, H);
  const xMax = Math.max(1, ...series.map((s) => s.data.length - 1));
  const X = (x) => L + (x / xMax) * (W - L - 10);
  const Y = (y) => H - B - (y / yMax) * (H - B - 10);
  g.strokeStyle = "#000"; g.strokeRect(L, 10, W - L - 10, H - B - 10);
  g.fillStyle = "#555";
  g.fillText("0", L - 10, H - B + 4); g.fillText(String(yMax), 4, 16);
  g.fillText(`slot ${xMax}`, W - 70, H - 6);
  if (hline !== undefined) {
    g.strokeStyle = "#aaa"; g.setLineDash([4, 4]);
    g.beginPath(); g.moveTo(L, Y(hline)); g.lineTo(W - 10, Y(hline)); g.stroke();
    g.setLineDash([]);
  }
  series.forEach((s, j) => {
    g.strokeStyle = s.color; g.beginPath();
    s.data.forEach((y, x) => (x ? g.lineTo(X(x), Y(y)) : g.moveTo(X(x), Y(y))));
    g.stroke();
    g.fillStyle = s.color; g.fillText(s.label, L + 8, 24 + 14 * j);
  });
}

function spread() {
  const p = params();
  const out = [];
  try {
    for (const [proto, color] of [["random_push", "#d62728"], ["mobile_push", "#1f77b4"]]) {
      const q = [...p]; q[3] = proto;
      const data = spread_curve(...q, 200000n);
      out.push({ label: `${proto}: ${data.length - 1} slots`, color, data });
    }
  } catch (e) {
    $("spread-status").textContent = String(e);
    return;
  }
  $("spread-status").textContent = out.map((s) => s.label).join("   ");
  plotLines($("spread-plot"), out, 1);
}

function mix() {
  const s = Number($("side").value), boundary = $("boundary").value;
  try {
    const data = mixing_curve(s, boundary, BigInt(Math.max(50, 12 * s * s)));
    const t = data.findIndex((d) => d <= 0.25);
    $("mix-status").textContent = `t_mix(1/4) from the corner = ${t < 0 ? "beyond range" : t}`;
    plotLines($("mix-plot"), [{ label: `s=${s} ${boundary}`, color: "#1f77b4", data }], 1, 0.25);
  } catch (e) {
    $("mix-status").textContent = String(e);
  }
}

await init();
$("reset").onclick = reset;
$("step").onclick = () => { if (demo) { demo.step(1); drawWorld(); } };
$("play").onclick = () => {
  playing = !playing;
  $("play").textContent = playing ? "Pause" : "Play";
  if (playing) requestAnimationFrame(frame);
};
$("spread").onclick = spread;
$("mix").onclick = mix;
reset();
mix();
