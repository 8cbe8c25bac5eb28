/**
 * Browser wiring: binds the controller to the page and delegates DOM events.
 * The service base URL comes from ?api=, defaulting to same-origin.
 */

import { CurationApi } from "./api.js";
import { QueueController } from "./controller.js";
import { renderAcceptedPane, renderCounters, renderQueue, renderToolbar } from "./render.js";
import type { Channel, Scope } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new CurationApi(params.get("api") ?? "", (url, init) => fetch(url, init));
const controller = new QueueController(api);

const toolbarHost = document.getElementById("toolbar")!;
const queueHost = document.getElementById("queue")!;
const acceptedHost = document.getElementById("accepted")!;
const countersHost = document.getElementById("counters")!;

async function refreshCounters(): Promise<void> {
  try {
    const stats = await api.stats();
    countersHost.innerHTML = renderCounters(stats.pending, stats.accepted, stats.rules);
  } catch {
    countersHost.innerHTML = "";
  }
}

controller.subscribe((state) => {
  toolbarHost.innerHTML = renderToolbar(state);
  queueHost.innerHTML = renderQueue(state);
  acceptedHost.innerHTML = renderAcceptedPane(state.accepted);
});

toolbarHost.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches(".channel-toggle")) {
    void controller.setChannel(target.dataset.channel as Channel).then(refreshCounters);
  } else if (target.matches(".next")) {
    void controller.nextPage();
  } else if (target.matches(".prev")) {
    void controller.previousPage();
  }
});

queueHost.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches(".retry")) {
    void controller.load().then(refreshCounters);
  } else if (target.matches(".dismiss")) {
    void controller.dismiss(target.dataset.id!, "").then(refreshCounters);
  }
});

queueHost.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (!form.matches(".accept-form")) {
    return;
  }
  event.preventDefault();
  const replacement = (form.elements.namedItem("replacement") as HTMLInputElement).value;
  const scope = (form.elements.namedItem("scope") as HTMLSelectElement).value as Scope;
  void controller.accept(form.dataset.id!, replacement, scope).then(refreshCounters);
});

void controller.load().then(refreshCounters);
