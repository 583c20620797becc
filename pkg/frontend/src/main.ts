import { ApiClient } from "./api.js";
import { Console } from "./app.js";
import { renderApp } from "./views.js";

const root = document.getElementById("app")!;
const input = document.getElementById("question") as HTMLInputElement;
const send = document.getElementById("send") as HTMLButtonElement;

const console_ = new Console(new ApiClient(""), undefined, (state) => {
  root.innerHTML = renderApp(state);
});
root.innerHTML = renderApp(console_.state);

function syncSendButton(): void {
  send.disabled = input.value.trim() === "" || console_.state.sessionEnded;
}
syncSendButton();
input.addEventListener("input", syncSendButton);

async function submit(): Promise<void> {
  const text = input.value;
  if (!text.trim()) {
    return; // send stays disabled; never issue an empty request
  }
  input.value = "";
  syncSendButton();
  await console_.submitQuestion(text);
}

send.addEventListener("click", () => void submit());
input.addEventListener("keydown", (event) => {
  if (event.key === "Enter") {
    void submit();
  }
});

root.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) {
    return;
  }
  event.preventDefault();
  const node = target.dataset.node ?? "";
  switch (target.dataset.action) {
    case "follow":
      void console_.followSuggestion(node);
      break;
    case "open-node":
      void console_.openNode(node);
      break;
    case "back":
      void console_.back();
      break;
    case "toggle":
      console_.toggleBranch(node);
      break;
    case "retry":
      void console_.submitQuestion(target.dataset.question ?? "");
      break;
    case "restart":
      console_.restartSession();
      syncSendButton();
      break;
    case "view":
      if (target.dataset.view === "TreeBrowser") {
        void console_.showTree();
      } else if (target.dataset.view === "Analytics") {
        void console_.showAnalytics();
      } else {
        console_.showChat();
      }
      break;
  }
});
