// DOM rendering for one round. Pure functions of the server payload: every
// number shown on screen is read straight out of the view object.

import type { View } from "./types.js";

const ACTION_ORDER = ["Solo", "Call"] as const;

export function buildLayout(root: HTMLElement): void {
  root.innerHTML = `
    <div id="error-banner" class="banner error" hidden></div>
    <div id="intervention-note" class="banner advice" hidden></div>
    <div id="tip-note" class="banner tip" hidden></div>
    <div class="panels">
      <section id="map-panel" class="panel"><h2>Field</h2><div id="map-grid"></div></section>
      <section id="payoff-panel" class="panel">
        <h2>Payoff this round</h2>
        <table id="payoff-table"></table>
      </section>
      <section id="progress-panel" class="panel"><h2>Progress</h2><dl id="progress-list"></dl></section>
    </div>
    <div id="feedback" class="feedback" hidden></div>
    <div id="controls">
      <button id="solo-button" data-action="Solo">Defuse alone</button>
      <button id="call-button" data-action="Call">Call for help</button>
    </div>
    <div id="modal-overlay" hidden>
      <div id="modal" role="dialog">
        <p id="modal-text"></p>
        <button id="modal-dismiss">Got it</button>
      </div>
    </div>
  `;
  const dismiss = root.querySelector<HTMLButtonElement>("#modal-dismiss")!;
  dismiss.addEventListener("click", () => {
    root.querySelector<HTMLElement>("#modal-overlay")!.hidden = true;
  });
}

export function showError(root: HTMLElement, message: string): void {
  const banner = root.querySelector<HTMLElement>("#error-banner")!;
  banner.textContent = message;
  banner.hidden = false;
}

export function clearError(root: HTMLElement): void {
  const banner = root.querySelector<HTMLElement>("#error-banner")!;
  banner.hidden = true;
  banner.textContent = "";
}

export function renderFeedback(root: HTMLElement, reward: number, timeCost: number): void {
  const feedback = root.querySelector<HTMLElement>("#feedback")!;
  feedback.textContent = `Last round: +${reward} points, ${timeCost} seconds spent.`;
  feedback.hidden = false;
}

function validate(view: View): string | null {
  if (typeof view !== "object" || view === null) return "payload is not an object";
  if (typeof view.trial !== "number" || typeof view.score !== "number")
    return "progress fields missing";
  if (!view.done) {
    if (!view.positions || !Array.isArray(view.positions.agent)) return "positions missing";
    if (!view.payoff) return "payoff table missing";
    if (typeof view.grid_size !== "number" || view.grid_size < 1) return "grid size missing";
  }
  return null;
}

function renderMap(root: HTMLElement, view: View): void {
  const grid = root.querySelector<HTMLElement>("#map-grid")!;
  grid.innerHTML = "";
  const size = view.grid_size;
  grid.style.gridTemplateColumns = `repeat(${size}, 1fr)`;
  const [ax, ay] = view.positions!.agent;
  const [tx, ty] = view.positions!.team;
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const cell = document.createElement("div");
      cell.className = "cell";
      if (x === ax && y === ay) {
        cell.classList.add("agent");
        cell.textContent = "A";
        cell.title = "You";
      }
      if (x === tx && y === ty) {
        cell.classList.add("team");
        cell.textContent = cell.textContent ? "A+T" : "T";
        cell.title = cell.title ? "You and teammates" : "Teammates";
      }
      grid.appendChild(cell);
    }
  }
}

function renderPayoff(root: HTMLElement, view: View): void {
  const table = root.querySelector<HTMLElement>("#payoff-table")!;
  const rows = ACTION_ORDER.map(
    (action) =>
      `<tr><td>${action}</td><td class="points">${view.payoff![action]} pts</td></tr>`,
  ).join("");
  table.innerHTML =
    `<tr><th>Action</th><th>Points (bomb level ${view.bomb_type})</th></tr>` + rows;
}

function renderProgress(root: HTMLElement, view: View): void {
  const list = root.querySelector<HTMLElement>("#progress-list")!;
  const badge = view.training ? ' <span class="badge">training</span>' : "";
  list.innerHTML = [
    `<dt>Trial</dt><dd id="progress-trial">${view.trial}${badge}</dd>`,
    `<dt>Time remaining</dt><dd id="progress-time">${view.time_remaining}</dd>`,
    `<dt>Bombs handled</dt><dd id="progress-bombs">${view.bombs_handled}</dd>`,
    `<dt>Score</dt><dd id="progress-score">${view.score}</dd>`,
  ].join("");
}

function renderNotes(root: HTMLElement, view: View): void {
  const note = root.querySelector<HTMLElement>("#intervention-note")!;
  const overlay = root.querySelector<HTMLElement>("#modal-overlay")!;
  const modalText = root.querySelector<HTMLElement>("#modal-text")!;
  if (view.intervention) {
    note.textContent = view.intervention.text;
    note.hidden = false;
    modalText.textContent = view.intervention.text;
    overlay.hidden = false;
  } else {
    note.hidden = true;
    note.textContent = "";
    overlay.hidden = true;
    modalText.textContent = "";
  }
  const tip = root.querySelector<HTMLElement>("#tip-note")!;
  if (view.tip) {
    tip.textContent = view.tip;
    tip.hidden = false;
  } else {
    tip.hidden = true;
    tip.textContent = "";
  }
}

function renderFinished(root: HTMLElement, view: View): void {
  const grid = root.querySelector<HTMLElement>("#map-grid")!;
  grid.innerHTML = "<p>Session complete. Thanks for playing!</p>";
  const table = root.querySelector<HTMLElement>("#payoff-table")!;
  table.innerHTML = "";
  renderProgress(root, view);
  for (const button of root.querySelectorAll<HTMLButtonElement>("#controls button")) {
    button.disabled = true;
  }
}

export function renderRound(view: View, root: HTMLElement): boolean {
  const problem = validate(view);
  if (problem) {
    showError(root, `Malformed server payload: ${problem}`);
    return false;
  }
  clearError(root);
  if (view.done) {
    renderFinished(root, view);
    return true;
  }
  renderMap(root, view);
  renderPayoff(root, view);
  renderProgress(root, view);
  renderNotes(root, view);
  for (const button of root.querySelectorAll<HTMLButtonElement>("#controls button")) {
    button.disabled = false;
  }
  return true;
}
