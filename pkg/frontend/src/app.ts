// Browser wiring: consultation panel, ranking workbench, summary panel.
// All behavior lives in the tested modules; this file only touches the DOM.

import { ApiClient } from "./api.js";
import { ConsultView } from "./consultView.js";
import { BallotState, canSubmit, newBallot, setDraw, setRank, submitRanking, validateBallot } from "./ballot.js";
import { toSummaryView } from "./summary.js";
import { keyId } from "./types.js";

const api = new ApiClient("");
const view = new ConsultView(api, window.localStorage);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderTurns(): void {
  const container = el<HTMLDivElement>("turns");
  container.innerHTML = "";
  for (const turn of view.turns) {
    const block = document.createElement("div");
    block.className = "turn";
    const question = document.createElement("p");
    question.className = "client";
    question.textContent = `客户：${turn.userMessage}`;
    block.appendChild(question);
    const answer = document.createElement("p");
    answer.className = turn.failed ? "lawyer failed" : "lawyer";
    answer.textContent = turn.failed ? `请求失败：${turn.error}` : `律师：${turn.answer}`;
    block.appendChild(answer);
    if (turn.badges.length) {
      const list = document.createElement("ul");
      list.className = "badges";
      for (const badge of turn.badges) {
        const item = document.createElement("li");
        item.className = `badge ${badge.badgeClass}`;
        item.textContent = `${badge.label} · ${badge.verdict}`;
        list.appendChild(item);
      }
      block.appendChild(list);
    }
    container.appendChild(block);
  }
}

function renderArticles(): void {
  const container = el<HTMLDivElement>("articles");
  container.innerHTML = "";
  for (const article of view.articles) {
    const id = keyId(article);
    const row = document.createElement("label");
    row.className = "article-toggle";
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = view.toggles.get(id) === true;
    checkbox.addEventListener("change", () => view.setToggle(article, checkbox.checked));
    row.appendChild(checkbox);
    const label = document.createElement("span");
    label.textContent = `《${article.title}》第${article.article}条 (score ${article.score.toFixed(2)})`;
    row.appendChild(label);
    container.appendChild(row);
  }
}

function renderBanner(): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = view.banner ?? "";
  banner.style.display = view.banner ? "block" : "none";
}

async function onPreview(): Promise<void> {
  const message = el<HTMLTextAreaElement>("message").value;
  if (!message.trim()) return;
  view.setDraft(message);
  await view.previewRetrieval(message);
  renderArticles();
}

async function onSend(): Promise<void> {
  const message = el<HTMLTextAreaElement>("message").value;
  if (!message.trim()) return;
  await view.ensureSession();
  const turn = await view.submitTurn(message);
  if (turn) el<HTMLTextAreaElement>("message").value = "";
  renderTurns();
  renderArticles();
  renderBanner();
}

let ballots: BallotState[] = [];
let ballotIndex = 0;

function currentBallot(): BallotState | undefined {
  return ballots[ballotIndex];
}

function renderBallot(): void {
  const container = el<HTMLDivElement>("ballot");
  container.innerHTML = "";
  const ballot = currentBallot();
  if (!ballot) {
    container.textContent = "没有待排序的任务。";
    return;
  }
  const heading = document.createElement("h3");
  heading.textContent = ballot.questionId;
  container.appendChild(heading);
  for (const response of ballot.responses) {
    const row = document.createElement("div");
    row.className = "ballot-row";
    const text = document.createElement("p");
    text.textContent = response.text;
    row.appendChild(text);
    const select = document.createElement("select");
    const blank = document.createElement("option");
    blank.value = "";
    blank.textContent = "—";
    select.appendChild(blank);
    for (let rank = 1; rank <= ballot.responses.length; rank++) {
      const option = document.createElement("option");
      option.value = String(rank);
      option.textContent = `rank ${rank}`;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      setRank(ballot, response.token, select.value ? Number(select.value) : null);
      updateBallotControls();
    });
    row.appendChild(select);
    container.appendChild(row);
  }
  updateBallotControls();
}

function updateBallotControls(): void {
  const ballot = currentBallot();
  const button = el<HTMLButtonElement>("submit-ballot");
  const errors = el<HTMLDivElement>("ballot-errors");
  if (!ballot) {
    button.disabled = true;
    errors.textContent = "";
    return;
  }
  const result = validateBallot(ballot);
  button.disabled = !result.ok;
  errors.textContent = result.errors.map((e) => `${e.token ?? ""} ${e.message}`).join("; ");
}

async function onSubmitBallot(): Promise<void> {
  const ballot = currentBallot();
  if (!ballot || !canSubmit(ballot)) return;
  await submitRanking(api, ballot);
  ballotIndex += 1;
  renderBallot();
  await renderSummary();
}

function onDrawToggle(checked: boolean): void {
  const ballot = currentBallot();
  if (!ballot) return;
  setDraw(ballot, checked);
  updateBallotControls();
}

async function renderSummary(): Promise<void> {
  const container = el<HTMLDivElement>("summary");
  const summary = toSummaryView(await api.rankingSummary());
  container.innerHTML = "";
  if (summary.empty) {
    container.textContent = "暂无排序数据。";
    return;
  }
  for (const bar of summary.bars) {
    const row = document.createElement("div");
    row.className = "summary-row";
    const name = document.createElement("span");
    name.className = "system-name";
    name.textContent = bar.system;
    row.appendChild(name);
    const track = document.createElement("div");
    track.className = "bar";
    for (const segment of bar.segments) {
      const piece = document.createElement("div");
      piece.className = `segment ${segment.label.replace(" ", "-")}`;
      piece.style.width = `${segment.pct}%`;
      piece.title = `${segment.label}: ${segment.pct}%`;
      track.appendChild(piece);
    }
    row.appendChild(track);
    container.appendChild(row);
  }
}

async function boot(): Promise<void> {
  el<HTMLButtonElement>("preview").addEventListener("click", () => void onPreview());
  el<HTMLButtonElement>("send").addEventListener("click", () => void onSend());
  el<HTMLButtonElement>("submit-ballot").addEventListener("click", () => void onSubmitBallot());
  el<HTMLInputElement>("draw").addEventListener("change", (event) =>
    onDrawToggle((event.target as HTMLInputElement).checked),
  );
  el<HTMLTextAreaElement>("message").value = view.pendingMessage;
  try {
    const tasks = await api.ballotTasks();
    ballots = tasks.tasks.map(newBallot);
  } catch {
    ballots = [];
  }
  renderBallot();
  await renderSummary().catch(() => undefined);
  if (view.sessionId) {
    await view.ensureSession().catch(() => undefined);
    renderTurns();
  }
}

void boot();
