// Page wiring: one session per tab, server-authoritative throughout.

import { ApiClient, ApiError } from "./api.js";
import type { ActionName, View } from "./types.js";
import { buildLayout, renderFeedback, renderRound, showError } from "./view.js";

const client = new ApiClient("");

function startButton(root: HTMLElement, picker: HTMLElement): void {
  picker.innerHTML = `
    <label>Condition
      <select id="condition-select">
        <option>ToM+XRL</option>
        <option>XRL-only</option>
        <option>ToM-only</option>
        <option>None</option>
      </select>
    </label>
    <button id="start-button">Start session</button>
  `;
  picker.querySelector<HTMLButtonElement>("#start-button")!.addEventListener("click", async () => {
    const condition =
      picker.querySelector<HTMLSelectElement>("#condition-select")!.value;
    try {
      const created = await client.createSession(condition);
      picker.hidden = true;
      runSession(root, created.session_id, created.view);
    } catch (err) {
      showError(root, `Could not start a session: ${String(err)}`);
    }
  });
}

function runSession(root: HTMLElement, sessionId: string, first: View): void {
  renderRound(first, root);
  for (const button of root.querySelectorAll<HTMLButtonElement>("#controls button")) {
    button.addEventListener("click", async () => {
      const action = button.dataset.action as ActionName;
      for (const b of root.querySelectorAll<HTMLButtonElement>("#controls button")) {
        b.disabled = true;
      }
      try {
        const result = await client.submitAction(sessionId, action);
        renderFeedback(root, result.reward, result.time_cost);
        renderRound(result.next_view, root);
      } catch (err) {
        // leave the round untouched; the player may simply try again
        if (err instanceof ApiError) {
          showError(root, `Action rejected (${err.status}): ${err.message}`);
        } else {
          showError(root, `Network problem, please retry: ${String(err)}`);
        }
        for (const b of root.querySelectorAll<HTMLButtonElement>("#controls button")) {
          b.disabled = false;
        }
      }
    });
  }
}

export function boot(): void {
  const root = document.querySelector<HTMLElement>("#app")!;
  const picker = document.querySelector<HTMLElement>("#picker")!;
  buildLayout(root);
  startButton(root, picker);
}

if (typeof document !== "undefined" && document.querySelector("#app")) {
  boot();
}
