import { beforeEach, describe, expect, it } from "vitest";

import { CurationApi } from "../src/api.js";
import { QueueController } from "../src/controller.js";
import { escapeHtml, renderAcceptedPane, renderQueue, renderToolbar } from "../src/render.js";
import { StubServer } from "./stub_server.js";

describe("renderQueue", () => {
  let server: StubServer;
  let controller: QueueController;

  beforeEach(async () => {
    server = new StubServer([
      { id: "c1", pattern: "rest you", frequency: 40 },
      { id: "c2", pattern: "arrest three", frequency: 25 },
      { id: "c3", pattern: "um or cared", frequency: 10 },
    ]);
    controller = new QueueController(new CurationApi("", server.fetch));
    await controller.load();
  });

  it("renders three rows in server order with frequency and channel badges", () => {
    const html = renderQueue(controller.getState());
    const order = [...html.matchAll(/<li class="candidate" data-id="(c\d)"/g)].map(
      (match) => match[1],
    );
    expect(order).toEqual(["c1", "c2", "c3"]);
    expect(html.indexOf("rest you")).toBeLessThan(html.indexOf("arrest three"));
    expect(html).toContain("&times;40");
    expect(html).toContain('badge-channel">agent');
  });

  it("renders the explicit empty state", async () => {
    await controller.setChannel("caller");
    expect(renderQueue(controller.getState())).toContain("no candidates pending");
  });

  it("renders the failure banner with a retry control", async () => {
    server.offline = true;
    await controller.load();
    const html = renderQueue(controller.getState());
    expect(html).toContain("banner-error");
    expect(html).toContain('class="retry"');
  });

  it("renders inline item errors", async () => {
    await controller.accept("c1", "rest you", "agent");
    const html = renderQueue(controller.getState());
    expect(html).toContain("item-error");
    expect(html).toContain("must differ");
  });

  it("escapes markup in server-provided text", () => {
    expect(escapeHtml('<img src="x">')).toBe("&lt;img src=&quot;x&quot;&gt;");
  });
});

describe("renderAcceptedPane", () => {
  it("shows accepted rules after a successful correction", async () => {
    const server = new StubServer([{ id: "c1", pattern: "rest you", frequency: 3 }]);
    const controller = new QueueController(new CurationApi("", server.fetch));
    await controller.load();
    await controller.accept("c1", "press two", "agent");
    const html = renderAcceptedPane(controller.getState().accepted);
    expect(html).toContain("rest you");
    expect(html).toContain("press two");
  });

  it("has an empty state", () => {
    expect(renderAcceptedPane([])).toContain("no corrections accepted");
  });
});

describe("renderToolbar", () => {
  it("marks the active channel and reports paging", async () => {
    const server = new StubServer([{ id: "c1", pattern: "rest you", frequency: 3 }]);
    const controller = new QueueController(new CurationApi("", server.fetch));
    await controller.load();
    const html = renderToolbar(controller.getState());
    expect(html).toMatch(/channel-toggle active" data-channel="agent"/);
    expect(html).toContain("page 1 / 1 (1 pending)");
  });
});
