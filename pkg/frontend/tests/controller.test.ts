import { describe, expect, it } from "vitest";

import type { ChatApi, Reply } from "../src/api.js";
import { ApiError } from "../src/api.js";
import { ChatController } from "../src/controller.js";

/** Scripted fake API: replays canned replies and records what the UI sent. */
class FakeApi implements ChatApi {
  sent: string[] = [];
  private queue: Reply[];
  constructor(replies: Reply[]) {
    this.queue = [...replies];
  }
  async createSession(): Promise<string> {
    return "session-1";
  }
  async sendMessage(_sessionId: string, text: string): Promise<Reply> {
    this.sent.push(text);
    const reply = this.queue.shift();
    if (!reply) throw new ApiError("script exhausted");
    return reply;
  }
}

const STUDENT_QUERY =
  "predict student performance for a student who studied 7 hours, previous scores of 99, " +
  "with extra-curricular activities, 9 hours of sleep and practiced 1 sample question paper";

const CARD: Reply = {
  kind: "candidate_card",
  text: "Matched model 'performance_linear_regression'",
  payload: {
    model: "performance_linear_regression",
    dataset: "Student_Performance",
    algorithm: "Linear Regression",
    metrics: { mse: 4.1, r2: 0.9885 },
  },
};
const ANSWER: Reply = {
  kind: "answer",
  text: "Predicted Performance Index: 91.89",
  payload: { prediction: 91.89, metrics: { r2: 0.9885 } },
};
const OFFER: Reply = {
  kind: "train_offer",
  text: "No stored model answers this query",
  payload: { dataset: "Student_Performance", default_algorithm: "linear_regression" },
};
const MENU: Reply = {
  kind: "algorithm_menu",
  text: "Which algorithm?",
  payload: {
    algorithms: ["linear_regression", "logistic_classifier", "recommender"],
    default: "linear_regression",
  },
};

describe("matched-model script", () => {
  it("renders candidate card, then the answer after Confirm sends 'yes'", async () => {
    const api = new FakeApi([CARD, ANSWER]);
    const controller = new ChatController(api);
    await controller.start();

    await controller.send(STUDENT_QUERY);
    const card = controller.messages.at(-1)!;
    expect(card.kind).toBe("candidate_card");
    expect(card.html).toContain('data-send="yes"');

    // the Confirm button's literal payload is exactly "yes"
    const confirmLiteral = /data-send="([^"]+)">Confirm/.exec(card.html)![1];
    expect(confirmLiteral).toBe("yes");

    await controller.send(confirmLiteral);
    expect(api.sent).toEqual([STUDENT_QUERY, "yes"]);
    const answer = controller.messages.at(-1)!;
    expect(answer.kind).toBe("answer");
    expect(answer.html).toContain("91.89");
  });
});

describe("train-new-model script", () => {
  it("renders offer, menu with default, and the final answer", async () => {
    const api = new FakeApi([OFFER, MENU, ANSWER]);
    const controller = new ChatController(api);
    await controller.start();

    await controller.send(STUDENT_QUERY);
    expect(controller.messages.at(-1)!.kind).toBe("train_offer");

    await controller.send("new");
    const menu = controller.messages.at(-1)!;
    expect(menu.kind).toBe("algorithm_menu");
    expect(menu.html).toContain('value="linear_regression" selected');

    await controller.send("recommender"); // selecting an algorithm sends its name
    expect(api.sent).toEqual([STUDENT_QUERY, "new", "recommender"]);
    expect(controller.messages.at(-1)!.kind).toBe("answer");
  });
});

describe("controller behavior", () => {
  it("holds no business logic: the rendered kind always mirrors the reply", async () => {
    const kinds: Reply[] = [
      { kind: "guide", text: "how to", payload: null },
      { kind: "clarification", text: "hm?", payload: null },
      { kind: "error", text: "nope", payload: null },
    ];
    const api = new FakeApi(kinds);
    const controller = new ChatController(api);
    await controller.start();
    for (const reply of kinds) {
      await controller.send("anything");
      expect(controller.messages.at(-1)!.kind).toBe(reply.kind);
    }
  });

  it("is busy while a request is in flight and ignores concurrent sends", async () => {
    let release!: (r: Reply) => void;
    const api: ChatApi = {
      createSession: async () => "s",
      sendMessage: () => new Promise((resolve) => (release = resolve)),
    };
    const controller = new ChatController(api);
    await controller.start();
    const pending = controller.send("first");
    expect(controller.busy).toBe(true);
    await controller.send("second (ignored while busy)");
    release(ANSWER);
    await pending;
    expect(controller.busy).toBe(false);
    const userTurns = controller.messages.filter((m) => m.role === "user");
    expect(userTurns).toHaveLength(1);
  });

  it("renders API failures as inline error bubbles", async () => {
    const api: ChatApi = {
      createSession: async () => "s",
      sendMessage: async () => {
        throw new ApiError("service unavailable", "network");
      },
    };
    const controller = new ChatController(api);
    await controller.start();
    await controller.send("hello");
    const last = controller.messages.at(-1)!;
    expect(last.kind).toBe("error");
    expect(last.html).toContain("service unavailable");
  });

  it("replaying the same transcript reproduces the same rendering", async () => {
    const run = async () => {
      const controller = new ChatController(new FakeApi([OFFER, MENU, ANSWER]));
      await controller.start();
      for (const text of [STUDENT_QUERY, "new", "linear_regression"]) {
        await controller.send(text);
      }
      return controller.messages.map((m) => `${m.role}:${m.kind}:${m.html}`);
    };
    expect(await run()).toEqual(await run());
  });
});
