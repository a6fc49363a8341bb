// Session controller: owns the transcript and the single in-flight request.
// Every state change originates from a server reply.

import { ApiError, ChatApi } from "./api.js";
import { renderInlineError, renderReply, renderUserMessage, UiMessage } from "./view.js";

export class ChatController {
  readonly messages: UiMessage[] = [];
  busy = false;
  private sessionId: string | null = null;

  constructor(
    private readonly api: ChatApi,
    private readonly onUpdate: () => void = () => {},
  ) {}

  async start(): Promise<void> {
    this.sessionId = await this.api.createSession();
    this.onUpdate();
  }

  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.busy) return;
    if (this.sessionId === null) {
      await this.start();
    }
    this.busy = true;
    this.messages.push(renderUserMessage(trimmed));
    this.onUpdate();
    try {
      const reply = await this.api.sendMessage(this.sessionId as string, trimmed);
      this.messages.push(renderReply(reply));
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      this.messages.push(renderInlineError(message));
    } finally {
      this.busy = false;
      this.onUpdate();
    }
  }
}
