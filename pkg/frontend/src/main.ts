// DOM wiring: transcript list, input row, and delegated clicks on the
// action buttons rendered inside system bubbles.

import { ApiClient } from "./api.js";
import { ChatController } from "./controller.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? (window as { PQA_API_BASE?: string }).PQA_API_BASE ?? "";

const transcript = document.getElementById("transcript") as HTMLElement;
const input = document.getElementById("message-input") as HTMLInputElement;
const sendButton = document.getElementById("send-button") as HTMLButtonElement;

const controller = new ChatController(new ApiClient(baseUrl), render);

function render(): void {
  transcript.innerHTML = controller.messages
    .map((m) => `<div class="bubble ${m.role} kind-${m.kind}">${m.html}</div>`)
    .join("");
  input.disabled = controller.busy;
  sendButton.disabled = controller.busy;
  transcript.scrollTop = transcript.scrollHeight;
}

async function submit(): Promise<void> {
  const text = input.value;
  input.value = "";
  await controller.send(text);
  if (!controller.busy) {
    input.focus();
  }
}

sendButton.addEventListener("click", () => void submit());
input.addEventListener("keydown", (event) => {
  if (event.key === "Enter" && !controller.busy) {
    void submit();
  }
});

transcript.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const literal = target.closest<HTMLElement>("[data-send]");
  if (literal?.dataset.send) {
    void controller.send(literal.dataset.send);
    return;
  }
  if (target.closest("[data-send-selected]")) {
    const bubble = target.closest(".bubble");
    const menu = bubble?.querySelector<HTMLSelectElement>("[data-algorithm-menu]");
    if (menu) {
      void controller.send(menu.value);
    }
  }
});

void controller.start();
