import init, { couple, sampleScript, Demo } from "./pkg/dact_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(4);
const bar = (p) => `<span class="bar" style="width:${(p * 8).toFixed(2)}rem"></span>`;
const esc = (s) => s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);

function showError(el, e) {
  el.innerHTML = `<p class="err">${esc(String(e.message ?? e))}</p>`;
}

// ---- coupling explorer ----

let pairs = [];

function buildPairs() {
  const k = Number($("k").value);
  pairs = [];
  for (let i = 0; i < k; i++) for (let j = i + 1; j < k; j++) pairs.push({ i, j, r: 0.5, n: 1 });
  const rows = pairs.map((p, idx) => `
    <tr class="slider">
      <td>r<sub>${p.i + 1}${p.j + 1}</sub></td>
      <td><input type="range" min="0" max="1" step="0.01" value="${p.r}" data-idx="${idx}" data-field="r"></td>
      <td class="num" id="rv${idx}">${p.r.toFixed(2)}</td>
      <td>n <input type="number" min="0.1" step="1" value="${p.n}" data-idx="${idx}" data-field="n"></td>
    </tr>`).join("");
  $("pair-controls").innerHTML = `<table>${rows}</table>`;
  for (const input of $("pair-controls").querySelectorAll("input")) {
    input.addEventListener("input", () => {
      pairs[input.dataset.idx][input.dataset.field] = Number(input.value);
      runCoupling();
    });
  }
  runCoupling();
}

function setPairs(values) {
  values.forEach((r, idx) => {
    pairs[idx].r = r;
    $("pair-controls").querySelector(`input[data-idx="${idx}"][data-field="r"]`).value = r;
  });
  runCoupling();
}

function runCoupling() {
  const k = Number($("k").value);
  const r = Array.from({ length: k }, () => Array(k).fill(0));
  const n = Array.from({ length: k }, () => Array(k).fill(0));
  pairs.forEach((p, idx) => {
    r[p.i][p.j] = p.r;
    n[p.i][p.j] = n[p.j][p.i] = p.n;
    $(`rv${idx}`).textContent = p.r.toFixed(2);
  });
  try {
    const out = JSON.parse(couple(JSON.stringify({ r, n })));
    const probs = out.probs.map((p, c) => `<tr><td>class ${c + 1}</td><td class="num">${fmt(p)}</td><td>${bar(p)}</td></tr>`).join("");
    const fit = out.pairs.map((p) => `<tr><td>${p.i + 1} vs ${p.j + 1}</td><td class="num">${fmt(p.r)}</td><td class="num">${fmt(p.mu)}</td></tr>`).join("");
    $("coupling-out").innerHTML = `
      <table><tr><th>class</th><th>p</th><th></th></tr>${probs}</table>
      <table><tr><th>pair</th><th>r</th><th>implied</th></tr>${fit}</table>
      <p>weighted divergence ${out.divergence.toExponential(3)}</p>`;
  } catch (e) {
    showError($("coupling-out"), e);
  }
}

function makeConsistent() {
  const k = Number($("k").value);
  const w = Array.from({ length: k }, () => 0.05 + Math.random());
  setPairs(pairs.map((p) => Number((w[p.i] / (w[p.i] + w[p.j])).toFixed(2))));
}

// ---- classifier ----

let demo = null;

async function train() {
  const status = $("train-status");
  status.textContent = "training...";
  $("classify").disabled = true;
  await new Promise((r) => setTimeout(r, 20)); // let the status paint
  try {
    demo?.free();
    const t0 = performance.now();
    demo = new Demo(Number($("dialogues").value), Number($("noise").value), Number($("seed").value), $("structure").value);
    const s = JSON.parse(demo.summary());
    const ms = (performance.now() - t0).toFixed(0);
    status.textContent = `${s.structure}: ${s.utterances} utterances, ${s.features} features, ` +
      `${s.layer1_svms} + ${s.layer2_svms} SVMs, ${ms} ms. Known acts: ${s.acts.join(", ")}`;
    $("classify").disabled = false;
    classify();
  } catch (e) {
    demo = null;
    status.textContent = "";
    showError($("classify-out"), e);
  }
}

function scoredList(list) {
  return list.map((s) => `${esc(s.label)} ${s.prob.toFixed(3)}`).join("<br>");
}

function classify() {
  if (!demo) return;
  try {
    const rows = JSON.parse(demo.classify($("script").value, $("uniform").checked, $("strict").checked));
    const body = rows.map((u) => `
      <tr>
        <td>${u.speaker}</td><td dir="auto">${esc(u.text)}</td>
        <td><b>${esc(u.act)}</b><br><span class="muted">${esc(u.category)}</span></td>
        <td class="muted">${scoredList(u.posterior)}</td>
        <td class="muted">${scoredList(u.acts)}</td>
      </tr>`).join("");
    $("classify-out").innerHTML = `<table>
      <tr><th>speaker</th><th>utterance</th><th>act</th><th>layer 2</th><th>with prior</th></tr>${body}</table>`;
  } catch (e) {
    showError($("classify-out"), e);
  }
}

await init();
$("k").addEventListener("change", buildPairs);
$("consistent").addEventListener("click", makeConsistent);
$("randomize").addEventListener("click", () => setPairs(pairs.map(() => Number(Math.random().toFixed(2)))));
$("train").addEventListener("click", train);
$("classify").addEventListener("click", classify);
$("uniform").addEventListener("change", classify);
$("strict").addEventListener("change", classify);
$("sample").addEventListener("click", () => {
  $("script").value = sampleScript(Math.floor(Math.random() * 1e9));
  classify();
});
buildPairs();
$("script").value = sampleScript(1);
