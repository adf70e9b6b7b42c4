import init, { image_grid, rotation_profile, ring_modulus_estimate } from "./pkg/spiralfd_demo.js";

const $ = (id) => document.getElementById(id);

function mapArgs() {
  return [$("theorem").value, parseFloat($("p").value), parseInt($("depth").value, 10)];
}

function drawGrid(data) {
  const cv = $("grid"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const cx = cv.width / 2, cy = cv.height / 2;
  // ln|f| is negative; squash with ln(1 + ln 1/|f|)
  const rad = (lnm) => Math.log1p(Math.max(0, -lnm));
  const rmax = rad(data.curves.reduce((m, c) => Math.min(m, ...c.points.map((q) => q[0])), 0)) || 1;
  const s = (cv.width / 2 - 10) / rmax;
  for (const c of data.curves) {
    g.strokeStyle = c.kind === "circle" ? "#1f5fbf" : "#c0392b";
    g.beginPath();
    c.points.forEach(([lnm, ang], i) => {
      // unit circle outermost, origin at the centre
      const r = (rmax - rad(lnm)) * s;
      const x = cx + r * Math.cos(ang), y = cy - r * Math.sin(ang);
      const far = i > 0 && Math.abs(ang - c.points[i - 1][1]) > Math.PI;
      if (i === 0 || far) g.moveTo(x, y); else g.lineTo(x, y);
    });
    g.stroke();
  }
}

function drawProfile(d) {
  const cv = $("profile"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const xs = d.ln_t.map((t) => Math.log(Math.max(1e-3, -t)));
  const series = [
    [d.ln_modulus.map((m) => (m < 0 ? Math.log(-m) : null)), "#1f5fbf"],
    [d.ln_rotation, "#c0392b"],
    [d.ln_distortion, "#888"],
  ];
  const all = series.flatMap(([v]) => v.filter((y) => y !== null && Number.isFinite(y)));
  const [ylo, yhi] = [Math.min(...all), Math.max(...all)];
  const [xlo, xhi] = [Math.min(...xs), Math.max(...xs)];
  const px = (x) => 40 + ((x - xlo) / (xhi - xlo || 1)) * (cv.width - 50);
  const py = (y) => cv.height - 20 - ((y - ylo) / (yhi - ylo || 1)) * (cv.height - 30);
  g.fillStyle = "#eee";
  for (const [a, b] of d.stages) {
    const x0 = px(Math.log(Math.max(1e-3, -b))), x1 = px(Math.log(-a));
    g.fillRect(x0, 0, x1 - x0, cv.height - 20);
  }
  for (const [ys, colour] of series) {
    g.strokeStyle = colour;
    g.beginPath();
    let pen = false;
    ys.forEach((y, i) => {
      if (y === null || !Number.isFinite(y)) { pen = false; return; }
      pen ? g.lineTo(px(xs[i]), py(y)) : g.moveTo(px(xs[i]), py(y));
      pen = true;
    });
    g.stroke();
  }
  g.fillStyle = "#000";
  g.fillText(ylo.toFixed(1), 2, cv.height - 22);
  g.fillText(yhi.toFixed(1), 2, 12);
}

function redraw() {
  $("map-err").textContent = "";
  try {
    drawGrid(JSON.parse(image_grid(...mapArgs(), 24, 400)));
    drawProfile(JSON.parse(rotation_profile(...mapArgs(), 1200)));
  } catch (e) {
    $("map-err").textContent = String(e);
  }
}

function ring() {
  const out = $("ring-out");
  out.textContent = "solving...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = JSON.parse(ring_modulus_estimate(
        parseFloat($("aspect").value), parseInt($("paths").value, 10), parseInt($("gridn").value, 10)));
      const ms = (performance.now() - t0).toFixed(0);
      out.textContent =
        `estimate ${r.value.toFixed(5)}\nexact    ${r.oracle.toFixed(5)}  (2 pi / ln(R/r))\n` +
        `rel err  ${(Math.abs(r.value - r.oracle) / r.oracle).toExponential(2)}\n` +
        `sweeps ${r.iterations}, gap ${r.gap.toExponential(2)}, ${ms} ms`;
    } catch (e) {
      out.textContent = String(e);
    }
  }, 0);
}

await init();
$("draw").onclick = redraw;
$("ring").onclick = ring;
redraw();
