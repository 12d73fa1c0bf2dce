import init, { holonomic_gate, noise_sweep, rabi_spectrum } from './pkg/hpgate_demo.js';

const $ = (id) => document.getElementById(id);
const fmt = (x, d = 4) => (Math.abs(x) < 1e-3 && x !== 0 ? x.toExponential(2) : x.toFixed(d));

function complex([re, im]) {
  const r = Math.abs(re) < 1e-12 ? 0 : re;
  const i = Math.abs(im) < 1e-12 ? 0 : im;
  if (i === 0) return fmt(r);
  if (r === 0) return `${fmt(i)}i`;
  return `${fmt(r)} ${i < 0 ? '−' : '+'} ${fmt(Math.abs(i))}i`;
}

function showError(el, e) {
  el.innerHTML = `<p class="err">${e}</p>`;
}

function updateGate() {
  const theta = parseFloat($('theta').value);
  $('theta-val').textContent = theta.toFixed(4);
  const out = $('gate-out');
  try {
    const v = JSON.parse(holonomic_gate($('family').value, theta));
    const rows = v.matrix.map((row) => `<tr>${row.map((c) => `<td>${complex(c)}</td>`).join('')}</tr>`).join('');
    out.innerHTML = `<table>${rows}</table>
      <p>duration ${(v.duration * 1e6).toFixed(4)} μs ·
      ‖U − closed form‖<sub>F</sub> = ${v.closed_form_error.toExponential(2)} ·
      parallel-transport residual ${v.transport_residual.toExponential(2)}</p>`;
  } catch (e) {
    showError(out, e);
  }
}

function logPlot(canvas, series) {
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flatMap((s) => s.points).filter(([x, y]) => x > 0 && y > 0);
  if (pts.length === 0) return;
  const lx = pts.map(([x]) => Math.log10(x));
  const ly = pts.map(([, y]) => Math.log10(y));
  const [x0, x1] = [Math.min(...lx), Math.max(...lx) || 1];
  const [y0, y1] = [Math.min(...ly), Math.max(...ly)];
  const pad = 40;
  const sx = (x) => pad + ((Math.log10(x) - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((Math.log10(y) - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = '#999';
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.font = '12px sans-serif';
  ctx.fillStyle = '#444';
  ctx.fillText('magnitude (log)', w / 2 - 40, h - 10);
  ctx.fillText('1 − F (log)', 4, pad - 8);
  ctx.fillText(`1e${y1.toFixed(1)}`, 2, pad + 4);
  ctx.fillText(`1e${y0.toFixed(1)}`, 2, h - pad);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    s.points.filter(([x, y]) => x > 0 && y > 0).forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(sx(x), sy(y));
      else ctx.lineTo(sx(x), sy(y));
    });
    ctx.stroke();
    ctx.fillText(s.label, w - pad - 120, pad + 16 + 16 * k);
  });
}

function runSweep() {
  const out = $('sweep-out');
  try {
    const mags = new Float64Array($('mags').value.split(',').map((s) => parseFloat(s.trim())));
    const v = JSON.parse(
      noise_sweep($('kind').value, $('gate').value, mags, parseInt($('cycles').value, 10), parseInt($('trials').value, 10), 7),
    );
    const col = (label) => v.columns.find((c) => c.label === label);
    const series = [{ label: 'no DD', color: '#c33', points: v.axis.map((x, i) => [x, 1 - col('mean_fidelity').values[i]]) }];
    if (col('mean_fidelity_dd')) {
      series.push({ label: 'with DD', color: '#36c', points: v.axis.map((x, i) => [x, 1 - col('mean_fidelity_dd').values[i]]) });
    }
    logPlot($('sweep-plot'), series);
    const head = `<tr><th>magnitude</th>${v.columns.map((c) => `<th>${c.label}</th>`).join('')}</tr>`;
    const rows = v.axis
      .map((x, i) => `<tr><td>${x.toExponential(2)}</td>${v.columns.map((c) => `<td>${c.values[i].toFixed(10)}</td>`).join('')}</tr>`)
      .join('');
    out.innerHTML = `<table>${head}${rows}</table>`;
  } catch (e) {
    showError(out, e);
  }
}

function updateSpectrum() {
  const out = $('spectrum-out');
  const canvas = $('spectrum-plot');
  const ctx = canvas.getContext('2d');
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  try {
    const v = JSON.parse(
      rabi_spectrum(parseFloat($('wq').value), parseFloat($('g').value), parseFloat($('wc').value), parseInt($('levels').value, 10)),
    );
    const top = Math.max(...v.levels_ghz) || 1;
    v.levels_ghz.forEach((e, i) => {
      const y = canvas.height - 20 - (e / top) * (canvas.height - 40);
      ctx.strokeStyle = i < 2 ? '#36c' : '#999';
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(80, y);
      ctx.lineTo(320, y);
      ctx.stroke();
      ctx.fillStyle = '#333';
      ctx.fillText(`E${i}  ${e.toFixed(4)} GHz`, 340, y + 4);
    });
    out.innerHTML = `<p>effective-qubit splitting ${v.splitting_ghz.toFixed(4)} GHz ·
      ⟨E0|(a†+a)|E1⟩ = ${v.matrix_element.toFixed(4)}</p>`;
  } catch (e) {
    showError(out, e);
  }
}

await init();
$('theta').addEventListener('input', updateGate);
$('family').addEventListener('change', updateGate);
$('run-sweep').addEventListener('click', runSweep);
for (const id of ['wq', 'g', 'wc', 'levels']) $(id).addEventListener('input', updateSpectrum);
updateGate();
runSweep();
updateSpectrum();
