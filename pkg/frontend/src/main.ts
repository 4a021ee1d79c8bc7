// Browser bootstrap: a small session form, then the annotator app.

import { ApiClient } from "./api";
import { AnnotatorApp } from "./app";
import type { Treatment } from "./types";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

function bootstrap(): void {
  const form = document.getElementById("session-form") as HTMLFormElement | null;
  const root = document.getElementById("app");
  if (!form || !root) {
    return;
  }
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const participant = (document.getElementById("participant") as HTMLInputElement).value.trim();
    const choice = (document.getElementById("treatment") as HTMLSelectElement).value;
    if (!participant) {
      return;
    }
    const treatment = choice === "auto" ? undefined : (choice as Treatment);
    form.style.display = "none";
    const app = new AnnotatorApp(new ApiClient(apiBase()), root);
    void app.start(participant, treatment);
  });
}

bootstrap();
