// Build the bindings first: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { appNames, appSource, compileText, filterDesign, benchApp } from "./pkg/dspc_web.js";

const $ = (id) => document.getElementById(id);

function show(el, text, failed) {
  el.textContent = text;
  el.className = failed ? "error" : "";
}

function loadApp() {
  $("source").value = appSource($("app").value);
}

function compile() {
  try {
    show($("compiled"), compileText($("source").value, $("stage").value, $("optimize").checked, Number($("size").value)));
  } catch (e) {
    show($("compiled"), String(e), true);
  }
}

function plot(coeffs) {
  const c = $("taps-plot");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const peak = Math.max(...coeffs.map(Math.abs)) || 1;
  const mid = c.height / 2;
  const dx = c.width / coeffs.length;
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(0, mid);
  g.lineTo(c.width, mid);
  g.stroke();
  g.fillStyle = "#1565c0";
  coeffs.forEach((v, i) => {
    const h = (v / peak) * (mid - 4);
    g.fillRect(i * dx, Math.min(mid, mid - h), Math.max(1, dx - 1), Math.abs(h));
  });
}

function design() {
  try {
    const d = JSON.parse(filterDesign(Number($("taps").value), Number($("cutoff").value)));
    show($("design-info"), `trig calls ${d.trig_none} -> ${d.trig_dsp}, patterns fired [${d.fired.join(",")}]`);
    plot(d.coeffs);
  } catch (e) {
    show($("design-info"), String(e), true);
  }
}

function bench() {
  const out = $("bench-out");
  try {
    const r = JSON.parse(benchApp($("app").value, Number($("size").value)));
    const rows = Object.entries(r.ratios)
      .filter(([name]) => name !== "wall_time_ns")
      .map(([name, v]) => `<tr><td>${name}</td><td>${v.before}</td><td>${v.after}</td><td>${v.ratio === null ? "-" : v.ratio.toFixed(4)}</td></tr>`)
      .join("");
    const checks = r.checks
      .map((c) => `<li class="${c.passed ? "" : "error"}">${c.passed ? "PASS" : "FAIL"} ${c.name}: ${c.detail}</li>`)
      .join("");
    out.innerHTML = `<p>${r.app}, N = ${r.input_size}, fired [${r.fired.join(",")}]</p>
      <table><tr><th>counter</th><th>none</th><th>dsp</th><th>ratio</th></tr>${rows}</table>
      <ul>${checks}</ul>`;
  } catch (e) {
    out.innerHTML = "";
    out.append(String(e));
    out.className = "error";
  }
}

await init();
for (const name of appNames()) {
  $("app").add(new Option(name, name));
}
$("app").addEventListener("change", () => { loadApp(); compile(); });
$("compile").addEventListener("click", compile);
$("design").addEventListener("click", design);
$("bench").addEventListener("click", bench);
loadApp();
compile();
design();
