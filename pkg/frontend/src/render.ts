/**
 * Pure HTML renderers: state in, markup string out. Keeping these free of
 * DOM access makes the queue renderable (and testable) without a browser.
 */

import type { QueueState } from "./controller.js";
import type { AcceptedRule, CandidateView } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderCandidateRow(item: CandidateView, error?: string): string {
  const samples = item.sample_utterance_ids.slice(0, 3).join(", ");
  const errorBlock = error
    ? `<p class="item-error" role="alert">${escapeHtml(error)}</p>`
    : "";
  return `
<li class="candidate" data-id="${escapeHtml(item.id)}">
  <div class="candidate-head">
    <span class="badge badge-channel">${escapeHtml(item.channel)}</span>
    <span class="badge badge-frequency">&times;${item.frequency}</span>
    <span class="badge badge-kind">${escapeHtml(item.kind)}</span>
  </div>
  <p class="pattern">${escapeHtml(item.pattern)}</p>
  <p class="samples">seen in: ${escapeHtml(samples)}</p>
  <form class="accept-form" data-id="${escapeHtml(item.id)}">
    <input name="replacement" type="text" placeholder="corrected text"
           aria-label="replacement for ${escapeHtml(item.pattern)}" />
    <select name="scope" aria-label="rule scope">
      <option value="${escapeHtml(item.channel)}" selected>${escapeHtml(item.channel)} only</option>
      <option value="both">both channels</option>
    </select>
    <button type="submit" class="accept">accept</button>
    <button type="button" class="dismiss" data-id="${escapeHtml(item.id)}">dismiss</button>
  </form>
  ${errorBlock}
</li>`.trim();
}

export function renderQueue(state: QueueState): string {
  if (state.connectionError) {
    return `
<div class="banner banner-error" role="alert">
  <p>cannot reach the curation service: ${escapeHtml(state.connectionError)}</p>
  <button class="retry">retry</button>
</div>`.trim();
  }
  if (state.loading) {
    return `<p class="loading">loading…</p>`;
  }
  if (state.items.length === 0) {
    return `<p class="empty-state">no candidates pending for the ${escapeHtml(state.channel)} channel</p>`;
  }
  const rows = state.items
    .map((item) => renderCandidateRow(item, state.itemErrors.get(item.id)))
    .join("\n");
  return `<ol class="candidate-list">\n${rows}\n</ol>`;
}

export function renderAcceptedPane(rules: AcceptedRule[]): string {
  if (rules.length === 0) {
    return `<p class="empty-state">no corrections accepted this session</p>`;
  }
  const rows = rules
    .map(
      (rule) => `
<li class="accepted-rule">
  <span class="from">${escapeHtml(rule.pattern)}</span>
  <span class="arrow">&rarr;</span>
  <span class="to">${escapeHtml(rule.replacement)}</span>
  <span class="badge badge-scope">${escapeHtml(rule.channel_scope)}</span>
</li>`.trim(),
    )
    .join("\n");
  return `<ul class="accepted-list">\n${rows}\n</ul>`;
}

export function renderToolbar(state: QueueState): string {
  const lastPage = Math.max(1, Math.ceil(state.total / state.pageSize));
  const caller = state.channel === "caller" ? "active" : "";
  const agent = state.channel === "agent" ? "active" : "";
  return `
<div class="toolbar">
  <button class="channel-toggle ${agent}" data-channel="agent">agent</button>
  <button class="channel-toggle ${caller}" data-channel="caller">caller</button>
  <span class="pager">
    <button class="prev" ${state.page <= 1 ? "disabled" : ""}>&laquo;</button>
    page ${state.page} / ${lastPage} (${state.total} pending)
    <button class="next" ${state.page >= lastPage ? "disabled" : ""}>&raquo;</button>
  </span>
</div>`.trim();
}

export function renderCounters(pending: number, acceptedTotal: number, rules: number): string {
  return `
<div class="counters">
  <span class="counter">pending ${pending}</span>
  <span class="counter">accepted ${acceptedTotal}</span>
  <span class="counter">rules ${rules}</span>
</div>`.trim();
}
