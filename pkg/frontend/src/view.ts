/**
 * DOM layer. Renders SessionState and translates user gestures into actions;
 * every attribute value shown here was produced by the service.
 */

import { clusterColor, labelChoices, labelText } from "./overlay.js";
import type { SampleFlow } from "./requests.js";
import { canSample, rasterRanks, validateDraft, type SessionState, type Store } from "./store.js";
import { ATTRIBUTES, type Attribute, type DraftBox, type Mode } from "./types.js";

const CANVAS_MAX_W = 440;
const CANVAS_MAX_H = 560;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function scaleFor(state: SessionState): number {
  const { canvasWidth, canvasHeight } = state.draft;
  return Math.min(CANVAS_MAX_W / canvasWidth, CANVAS_MAX_H / canvasHeight, 1);
}

export function createView(root: HTMLElement, store: Store, flow: SampleFlow): void {
  let overlayAttr: Attribute = "font";
  let selectedBox: number | null = null;
  let openLockCluster: number | null = null;
  let backgroundPreview: string | null = null;

  // ---- static skeleton ----------------------------------------------------
  const stage = el("div", "stage");
  const canvasBox = el("div", "canvas");
  stage.appendChild(canvasBox);

  const boxPanel = el("div", "panel");
  const sidebar = el("div", "sidebar");
  const clustersPanel = el("div", "panel");
  const locksPanel = el("div", "panel");
  const errorBar = el("div", "error-bar");
  const gridPanel = el("div", "grid");
  const modal = el("div", "modal");
  modal.addEventListener("click", () => {
    modal.style.display = "none";
  });

  const left = el("div", "column");
  left.append(stage, boxPanel);
  const right = el("div", "column");
  right.append(sidebar, clustersPanel, locksPanel);
  const top = el("div", "columns");
  top.append(left, right);
  root.append(top, errorBar, gridPanel, modal);

  // ---- sidebar (uncontrolled inputs, built once meta arrives) -------------
  const sliderInputs = new Map<Attribute, HTMLInputElement>();
  let sampleButton: HTMLButtonElement | null = null;
  let seedInput: HTMLInputElement | null = null;

  function buildSidebar(): void {
    sidebar.textContent = "";
    sidebar.appendChild(el("h3", undefined, "Diversity"));
    for (const attr of ATTRIBUTES) {
      const row = el("div", "slider-row");
      const label = el("label", undefined, attr.replace("_", " "));
      const input = el("input");
      input.type = "range";
      input.min = "0.01";
      input.max = "1";
      input.step = "0.01";
      input.value = String(store.state().sliders[attr]);
      const value = el("span", "slider-value", input.value);
      input.addEventListener("input", () => {
        value.textContent = input.value;
        void flow.changeSlider(attr, Number(input.value));
      });
      sliderInputs.set(attr, input);
      row.append(label, input, value);
      sidebar.appendChild(row);
    }

    const modeRow = el("div", "mode-row");
    modeRow.appendChild(el("label", undefined, "mode"));
    for (const mode of ["plain", "structure_preserved"] as Mode[]) {
      const btn = el("button", "mode-btn", mode.replace("_", " "));
      btn.dataset.mode = mode;
      btn.addEventListener("click", () => {
        void flow.changeMode(mode);
      });
      modeRow.appendChild(btn);
    }
    sidebar.appendChild(modeRow);

    const nRow = el("div", "mode-row");
    nRow.appendChild(el("label", undefined, "samples"));
    const nInput = el("input");
    nInput.type = "number";
    nInput.min = "1";
    nInput.max = "64";
    nInput.value = String(store.state().n);
    nInput.addEventListener("change", () => {
      store.dispatch({ kind: "set_n", n: Number(nInput.value) });
    });
    nRow.appendChild(nInput);
    nRow.appendChild(el("label", undefined, "seed"));
    seedInput = el("input");
    seedInput.type = "number";
    seedInput.value = String(store.state().seed);
    seedInput.addEventListener("change", () => {
      store.dispatch({ kind: "set_seed", seed: Number(seedInput!.value) });
    });
    nRow.appendChild(seedInput);
    sidebar.appendChild(nRow);

    sampleButton = el("button", "sample-btn", "Sample");
    sampleButton.addEventListener("click", () => {
      const s = store.state();
      if (s.grid !== null) {
        // fresh suggestions on every click; locked labels must survive anyway
        store.dispatch({ kind: "set_seed", seed: s.seed + 1 });
      }
      void flow.requestSamples();
    });
    sidebar.appendChild(sampleButton);
  }

  // ---- canvas editor -------------------------------------------------------
  const boxNodes = new Map<number, HTMLDivElement>();

  function beginDrag(node: HTMLDivElement, box: DraftBox, down: PointerEvent): void {
    down.preventDefault();
    selectedBox = box.id;
    const scale = scaleFor(store.state());
    const startX = down.clientX;
    const startY = down.clientY;
    let cx = box.cx;
    let cy = box.cy;
    const move = (ev: PointerEvent) => {
      cx = box.cx + (ev.clientX - startX) / scale;
      cy = box.cy + (ev.clientY - startY) / scale;
      node.style.left = `${cx * scale}px`;
      node.style.top = `${cy * scale}px`;
      // live raster re-sort while dragging, committed as one action on drop
      const draft = store.state().draft;
      const moved = {
        ...draft,
        boxes: draft.boxes.map((b) => (b.id === box.id ? { ...b, cx, cy } : b)),
      };
      const ranks = rasterRanks(moved);
      moved.boxes.forEach((b, i) => {
        const badge = boxNodes.get(b.id)?.querySelector(".badge");
        if (badge) badge.textContent = String(ranks[i] + 1);
      });
    };
    const up = () => {
      window.removeEventListener("pointermove", move);
      window.removeEventListener("pointerup", up);
      store.dispatch({ kind: "move_box", id: box.id, cx, cy });
    };
    window.addEventListener("pointermove", move);
    window.addEventListener("pointerup", up);
  }

  function renderCanvas(state: SessionState): void {
    const scale = scaleFor(state);
    canvasBox.style.width = `${state.draft.canvasWidth * scale}px`;
    canvasBox.style.height = `${state.draft.canvasHeight * scale}px`;
    canvasBox.style.backgroundImage = backgroundPreview ? `url(${backgroundPreview})` : "";

    const alive = new Set(state.draft.boxes.map((b) => b.id));
    for (const [id, node] of boxNodes) {
      if (!alive.has(id)) {
        node.remove();
        boxNodes.delete(id);
      }
    }
    const ranks = rasterRanks(state.draft);
    const overlay = state.prediction?.clusters[overlayAttr];
    state.draft.boxes.forEach((box, i) => {
      let node = boxNodes.get(box.id);
      if (!node) {
        node = el("div", "text-box");
        node.appendChild(el("span", "badge"));
        node.appendChild(el("span", "box-text"));
        const captured = box.id;
        node.addEventListener("pointerdown", (ev) => {
          const current = store.state().draft.boxes.find((b) => b.id === captured);
          if (current) beginDrag(node!, current, ev);
          renderBoxPanel(store.state());
        });
        boxNodes.set(box.id, node);
        canvasBox.appendChild(node);
      }
      node.style.left = `${box.cx * scale}px`;
      node.style.top = `${box.cy * scale}px`;
      node.querySelector(".badge")!.textContent = String(ranks[i] + 1);
      node.querySelector(".box-text")!.textContent = box.text;
      node.classList.toggle("selected", box.id === selectedBox);
      // overlay paints the latest prediction's cluster for this element;
      // it can lag the draft until the next request round-trips
      const cluster = overlay && i < overlay.length ? overlay[i] : null;
      node.style.outlineColor = cluster === null ? "transparent" : clusterColor(cluster);
    });
  }

  function renderBoxPanel(state: SessionState): void {
    boxPanel.textContent = "";
    const addBtn = el("button", undefined, "Add text box");
    addBtn.addEventListener("click", () => {
      const d = state.draft;
      store.dispatch({
        kind: "add_box",
        text: "New text",
        cx: d.canvasWidth / 2,
        cy: d.canvasHeight / 2,
      });
    });
    boxPanel.appendChild(addBtn);

    const sizeRow = el("div", "mode-row");
    sizeRow.appendChild(el("label", undefined, "canvas"));
    const w = el("input");
    w.type = "number";
    w.value = String(state.draft.canvasWidth);
    const h = el("input");
    h.type = "number";
    h.value = String(state.draft.canvasHeight);
    const commit = () => {
      store.dispatch({ kind: "set_canvas", width: Number(w.value), height: Number(h.value) });
    };
    w.addEventListener("change", commit);
    h.addEventListener("change", commit);
    sizeRow.append(w, el("span", undefined, "×"), h);
    boxPanel.appendChild(sizeRow);

    const bgRow = el("div", "mode-row");
    bgRow.appendChild(el("label", undefined, "background"));
    const file = el("input");
    file.type = "file";
    file.accept = "image/*";
    file.addEventListener("change", () => {
      const f = file.files?.[0];
      if (f) void loadBackground(f);
    });
    bgRow.appendChild(file);
    if (state.draft.background) {
      const clear = el("button", undefined, "clear");
      clear.addEventListener("click", () => {
        backgroundPreview = null;
        store.dispatch({ kind: "set_background", background: null });
      });
      bgRow.appendChild(clear);
    }
    boxPanel.appendChild(bgRow);

    const box = state.draft.boxes.find((b) => b.id === selectedBox);
    if (box) {
      const row = el("div", "mode-row");
      row.appendChild(el("label", undefined, `box ${box.id} text`));
      const text = el("input");
      text.type = "text";
      text.value = box.text;
      text.addEventListener("change", () => {
        store.dispatch({ kind: "set_text", id: box.id, text: text.value });
      });
      const del = el("button", undefined, "delete");
      del.addEventListener("click", () => {
        selectedBox = null;
        store.dispatch({ kind: "delete_box", id: box.id });
      });
      row.append(text, del);
      boxPanel.appendChild(row);
    }

    for (const err of validateDraft(state.draft)) {
      boxPanel.appendChild(el("div", "field-error", `${err.field}: ${err.message}`));
    }
  }

  async function loadBackground(f: File): Promise<void> {
    const bitmap = await createImageBitmap(f);
    const limit = 128;
    const ratio = Math.min(limit / bitmap.width, limit / bitmap.height, 1);
    const w = Math.max(1, Math.round(bitmap.width * ratio));
    const h = Math.max(1, Math.round(bitmap.height * ratio));
    const scratch = document.createElement("canvas");
    scratch.width = w;
    scratch.height = h;
    const ctx = scratch.getContext("2d")!;
    ctx.drawImage(bitmap, 0, 0, w, h);
    const rgba = ctx.getImageData(0, 0, w, h).data;
    const rgb = new Uint8Array(w * h * 3);
    for (let i = 0, j = 0; i < rgba.length; i += 4, j += 3) {
      rgb[j] = rgba[i];
      rgb[j + 1] = rgba[i + 1];
      rgb[j + 2] = rgba[i + 2];
    }
    let bin = "";
    for (const byte of rgb) bin += String.fromCharCode(byte);
    backgroundPreview = scratch.toDataURL();
    store.dispatch({
      kind: "set_background",
      background: { width: w, height: h, rgbBase64: btoa(bin) },
    });
  }

  // ---- clusters, locks, grid ----------------------------------------------
  function renderClusters(state: SessionState): void {
    clustersPanel.textContent = "";
    clustersPanel.appendChild(el("h3", undefined, "Predicted structure"));

    const attrSel = el("select");
    for (const attr of ATTRIBUTES) {
      const opt = el("option", undefined, attr.replace("_", " "));
      opt.value = attr;
      if (attr === overlayAttr) opt.selected = true;
      attrSel.appendChild(opt);
    }
    attrSel.addEventListener("change", () => {
      overlayAttr = attrSel.value as Attribute;
      openLockCluster = null;
      renderClusters(store.state());
      renderCanvas(store.state());
    });
    clustersPanel.appendChild(attrSel);

    const prediction = state.prediction;
    if (!prediction || !state.meta) {
      clustersPanel.appendChild(el("p", "hint", "Sample once to see structure."));
      return;
    }
    const assignment = prediction.clusters[overlayAttr] ?? [];
    const members = new Map<number, number>();
    for (const c of assignment) members.set(c, (members.get(c) ?? 0) + 1);

    for (const [cluster, count] of [...members.entries()].sort((a, b) => a[0] - b[0])) {
      const chip = el("div", "cluster-chip");
      chip.style.borderColor = clusterColor(cluster);
      const dot = el("span", "dot");
      dot.style.background = clusterColor(cluster);
      chip.append(dot, el("span", undefined, `cluster ${cluster} · ${count} element${count > 1 ? "s" : ""}`));
      chip.addEventListener("click", () => {
        openLockCluster = openLockCluster === cluster ? null : cluster;
        renderClusters(store.state());
      });
      clustersPanel.appendChild(chip);

      if (openLockCluster === cluster) {
        const panel = el("div", "lock-editor");
        const sel = el("select");
        const current = state.locks.find(
          (l) => l.attribute === overlayAttr && l.cluster === cluster,
        );
        for (const choice of labelChoices(state.meta, overlayAttr)) {
          const opt = el("option", undefined, choice.text);
          opt.value = String(choice.label);
          if (current && current.label === choice.label) opt.selected = true;
          sel.appendChild(opt);
        }
        const lockBtn = el("button", undefined, "Lock");
        lockBtn.addEventListener("click", () => {
          store.dispatch({
            kind: "set_lock",
            lock: { attribute: overlayAttr, cluster, label: Number(sel.value) },
          });
          openLockCluster = null;
        });
        panel.append(sel, lockBtn);
        if (current) {
          const unlock = el("button", undefined, "Unlock");
          unlock.addEventListener("click", () => {
            store.dispatch({ kind: "clear_lock", attribute: overlayAttr, cluster });
            openLockCluster = null;
          });
          panel.appendChild(unlock);
        }
        clustersPanel.appendChild(panel);
      }
    }
  }

  function renderLocks(state: SessionState): void {
    locksPanel.textContent = "";
    locksPanel.appendChild(el("h3", undefined, "Locks"));
    if (state.locks.length === 0) {
      locksPanel.appendChild(el("p", "hint", "none"));
      return;
    }
    for (const lock of state.locks) {
      const row = el("div", "lock-row");
      const dot = el("span", "dot");
      dot.style.background = clusterColor(lock.cluster);
      const text = state.meta
        ? labelText(state.meta, lock.attribute, lock.label)
        : String(lock.label);
      row.append(
        dot,
        el("span", undefined, `${lock.attribute} · cluster ${lock.cluster} → ${text}`),
      );
      const remove = el("button", undefined, "✕");
      remove.addEventListener("click", () => {
        store.dispatch({ kind: "clear_lock", attribute: lock.attribute, cluster: lock.cluster });
      });
      row.appendChild(remove);
      locksPanel.appendChild(row);
    }
  }

  function renderGrid(state: SessionState): void {
    gridPanel.textContent = "";
    if (!state.grid) return;
    state.grid.svgs.forEach((svg, i) => {
      const cell = el("figure", "cell");
      const holder = el("div", "svg-holder");
      holder.innerHTML = svg;
      const node = holder.querySelector("svg");
      if (node) {
        node.removeAttribute("width");
        node.removeAttribute("height");
      }
      cell.appendChild(holder);
      cell.appendChild(el("figcaption", undefined, `seed ${state.grid!.seed} · #${i}`));
      cell.addEventListener("click", () => {
        modal.innerHTML = svg;
        const big = modal.querySelector("svg");
        if (big) {
          big.removeAttribute("width");
          big.removeAttribute("height");
        }
        modal.style.display = "flex";
      });
      gridPanel.appendChild(cell);
    });
  }

  function renderError(state: SessionState): void {
    errorBar.textContent = "";
    errorBar.style.display = state.error === null ? "none" : "block";
    if (state.error === null) return;
    errorBar.appendChild(el("span", undefined, state.error));
    const retry = el("button", undefined, "Retry");
    retry.addEventListener("click", () => {
      void flow.retry();
    });
    errorBar.appendChild(retry);
  }

  function renderChrome(state: SessionState): void {
    if (sampleButton) {
      sampleButton.disabled = !canSample(state);
      sampleButton.textContent = state.inflight !== null ? "Sampling…" : "Sample";
    }
    if (seedInput && document.activeElement !== seedInput) {
      seedInput.value = String(state.seed);
    }
    sidebar.querySelectorAll<HTMLButtonElement>(".mode-btn").forEach((btn) => {
      btn.classList.toggle("active", btn.dataset.mode === state.mode);
    });
  }

  // ---- subscription ---------------------------------------------------------
  let prev = store.state();
  buildSidebar();
  renderCanvas(prev);
  renderBoxPanel(prev);
  renderClusters(prev);
  renderLocks(prev);
  renderGrid(prev);
  renderError(prev);
  renderChrome(prev);

  store.subscribe((state) => {
    if (state.draft !== prev.draft || state.prediction !== prev.prediction) {
      renderCanvas(state);
      renderBoxPanel(state);
    }
    if (state.prediction !== prev.prediction || state.meta !== prev.meta) {
      renderClusters(state);
    }
    if (state.locks !== prev.locks || state.meta !== prev.meta) {
      renderLocks(state);
      renderClusters(state);
    }
    if (state.grid !== prev.grid) renderGrid(state);
    if (state.error !== prev.error) renderError(state);
    renderChrome(state);
    prev = state;
  });
}
