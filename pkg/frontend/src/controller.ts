/**
 * UI state machine for the curation queue.
 *
 * The server is the single source of truth: optimistic updates only ever
 * remove a row the server has already confirmed, and any conflict (another
 * curator resolved the item first) triggers a refetch so the local queue
 * converges back to server state.
 */

import { CurationApi, ServiceError } from "./api.js";
import type { AcceptedRule, CandidateView, Channel, Scope } from "./types.js";

export interface QueueState {
  channel: Channel;
  page: number;
  pageSize: number;
  total: number;
  items: CandidateView[];
  accepted: AcceptedRule[];
  /** Inline validation/conflict message per candidate id. */
  itemErrors: Map<string, string>;
  /** Connection-level failure banner; null when the service is reachable. */
  connectionError: string | null;
  loading: boolean;
}

export type Listener = (state: QueueState) => void;

/** Client-side validation mirroring the server's accept rules. */
export function validateReplacement(pattern: string, replacement: string): string | null {
  const normalized = replacement.trim().toLowerCase().split(/\s+/).filter(Boolean).join(" ");
  if (!normalized) {
    return "replacement must not be empty";
  }
  if (normalized === pattern.trim().toLowerCase()) {
    return "replacement must differ from the pattern";
  }
  return null;
}

export class QueueController {
  private state: QueueState;
  private listeners: Listener[] = [];

  constructor(
    private readonly api: CurationApi,
    // Agent side first: it is the cleaner, IVR-heavy, higher-yield queue.
    channel: Channel = "agent",
    pageSize = 20,
  ) {
    this.state = {
      channel,
      page: 1,
      pageSize,
      total: 0,
      items: [],
      accepted: [],
      itemErrors: new Map(),
      connectionError: null,
      loading: false,
    };
  }

  getState(): QueueState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<QueueState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async load(): Promise<void> {
    this.update({ loading: true });
    try {
      const page = await this.api.listCandidates(
        this.state.channel,
        this.state.page,
        this.state.pageSize,
      );
      this.update({
        items: page.items,
        total: page.total,
        connectionError: null,
        loading: false,
      });
    } catch (error) {
      if (error instanceof ServiceError) {
        this.update({ connectionError: `${error.code}: ${error.message}`, loading: false });
      } else {
        this.update({ connectionError: String(error), loading: false });
      }
    }
  }

  async setChannel(channel: Channel): Promise<void> {
    this.update({ channel, page: 1, itemErrors: new Map() });
    await this.load();
  }

  async nextPage(): Promise<void> {
    if (this.state.page * this.state.pageSize < this.state.total) {
      this.update({ page: this.state.page + 1 });
      await this.load();
    }
  }

  async previousPage(): Promise<void> {
    if (this.state.page > 1) {
      this.update({ page: this.state.page - 1 });
      await this.load();
    }
  }

  /**
   * Accept a correction. Returns true when the server accepted it.
   * Invalid input never reaches the network; a 409 conflict refetches so
   * the row reflects whatever the server now believes.
   */
  async accept(id: string, replacement: string, scope: Scope): Promise<boolean> {
    const item = this.state.items.find((candidate) => candidate.id === id);
    if (!item) {
      return false;
    }
    const validation = validateReplacement(item.pattern, replacement);
    if (validation) {
      this.setItemError(id, validation);
      return false;
    }
    try {
      const response = await this.api.accept(id, replacement, scope);
      this.clearItemError(id);
      this.update({
        items: this.state.items.filter((candidate) => candidate.id !== id),
        total: this.state.total - 1,
        accepted: [...this.state.accepted, response.rule],
      });
      return true;
    } catch (error) {
      await this.handleMutationError(id, error);
      return false;
    }
  }

  async dismiss(id: string, note: string): Promise<boolean> {
    try {
      await this.api.dismiss(id, note);
      this.clearItemError(id);
      this.update({
        items: this.state.items.filter((candidate) => candidate.id !== id),
        total: this.state.total - 1,
      });
      return true;
    } catch (error) {
      await this.handleMutationError(id, error);
      return false;
    }
  }

  private async handleMutationError(id: string, error: unknown): Promise<void> {
    if (error instanceof ServiceError) {
      this.setItemError(id, `${error.code}: ${error.message}`);
      if (error.status === 409) {
        // Someone else resolved this candidate; converge to server state.
        await this.load();
      }
    } else {
      this.update({ connectionError: String(error) });
    }
  }

  private setItemError(id: string, message: string): void {
    const itemErrors = new Map(this.state.itemErrors);
    itemErrors.set(id, message);
    this.update({ itemErrors });
  }

  private clearItemError(id: string): void {
    if (!this.state.itemErrors.has(id)) {
      return;
    }
    const itemErrors = new Map(this.state.itemErrors);
    itemErrors.delete(id);
    this.update({ itemErrors });
  }
}
