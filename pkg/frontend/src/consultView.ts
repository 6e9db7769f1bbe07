// Consultation view state: preview retrieval, per-article include toggles,
// turn submission and audit badge rendering.
//
// The invariant the tests pin down: a toggled-off article key never appears
// in any network request, and when every toggle is on the request omits
// included_keys entirely (the server then applies its own default).

import type { ApiClient } from "./api.js";
import type {
  ArticleKey,
  AuditFinding,
  ConsultTurn,
  RetrievedArticle,
  Verdict,
} from "./types.js";
import { keyId } from "./types.js";

/** Badge CSS class per verdict; bijective by construction (see tests). */
export const BADGE_CLASS: Record<Verdict, string> = {
  VALID: "badge-valid",
  H1: "badge-h1",
  H2: "badge-h2",
};

export interface CitationBadge {
  label: string; // e.g. 民法典 第1047条
  verdict: Verdict;
  badgeClass: string;
  quoted: string | null;
}

export interface RenderedTurn {
  userMessage: string;
  answer: string;
  failed: boolean;
  error: string;
  badges: CitationBadge[];
  retrieved: RetrievedArticle[];
}

export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const SESSION_KEY = "lexlab.session_id";
const DRAFT_KEY = "lexlab.draft";

export function findingLabel(finding: AuditFinding): string {
  const { title, article, paragraph } = finding.citation;
  let label = title;
  if (article !== null) {
    label += ` 第${article}条`;
    if (paragraph !== null && paragraph !== undefined) label += `第${paragraph}款`;
  }
  return label;
}

export function renderTurn(turn: ConsultTurn): RenderedTurn {
  return {
    userMessage: turn.user_message,
    answer: turn.answer,
    failed: turn.failed,
    error: turn.error,
    badges: turn.audit.findings.map((finding) => ({
      label: findingLabel(finding),
      verdict: finding.verdict,
      badgeClass: BADGE_CLASS[finding.verdict],
      quoted: finding.citation.quoted,
    })),
    retrieved: turn.retrieved,
  };
}

export class ConsultView {
  sessionId: string | null = null;
  turns: RenderedTurn[] = [];
  pendingMessage = "";
  articles: RetrievedArticle[] = [];
  toggles = new Map<string, boolean>();
  banner: string | null = null;
  busy = false;

  constructor(
    private readonly api: ApiClient,
    private readonly storage: DraftStorage | null = null,
    private readonly k = 3,
  ) {
    if (storage) {
      this.sessionId = storage.getItem(SESSION_KEY);
      this.pendingMessage = storage.getItem(DRAFT_KEY) ?? "";
    }
  }

  /** Create (or re-attach to) the server-side session. */
  async ensureSession(): Promise<string> {
    if (this.sessionId) {
      try {
        const session = await this.api.getSession(this.sessionId);
        this.turns = session.turns.map(renderTurn);
        return this.sessionId;
      } catch {
        this.sessionId = null; // stale id; fall through and create a new one
      }
    }
    const created = await this.api.createSession();
    this.sessionId = created.session_id;
    this.storage?.setItem(SESSION_KEY, created.session_id);
    return created.session_id;
  }

  setDraft(message: string): void {
    this.pendingMessage = message;
    if (this.storage) {
      if (message) this.storage.setItem(DRAFT_KEY, message);
      else this.storage.removeItem(DRAFT_KEY);
    }
  }

  /** Fetch the candidate articles for the drafted message; toggles default on. */
  async previewRetrieval(message: string): Promise<RetrievedArticle[]> {
    const result = await this.api.retrieve(message, this.k);
    this.articles = result.ranked;
    this.toggles = new Map(result.ranked.map((article) => [keyId(article), true]));
    return this.articles;
  }

  setToggle(key: ArticleKey, enabled: boolean): void {
    const id = keyId(key);
    if (!this.toggles.has(id)) {
      throw new Error(`unknown article toggle: ${id}`);
    }
    this.toggles.set(id, enabled);
  }

  enabledKeys(): ArticleKey[] {
    return this.articles.filter((article) => this.toggles.get(keyId(article)) === true);
  }

  allTogglesOn(): boolean {
    return this.articles.every((article) => this.toggles.get(keyId(article)) === true);
  }

  /**
   * Submit the drafted message. With every toggle on the request omits
   * included_keys (server default); otherwise only the enabled keys are
   * sent. Network failures raise a retryable banner and keep the draft.
   */
  async submitTurn(message: string): Promise<RenderedTurn | null> {
    if (!message.trim()) throw new Error("message is empty");
    if (!this.sessionId) throw new Error("no session; call ensureSession() first");
    if (this.busy) throw new Error("a consult request is already in flight");
    this.setDraft(message);
    this.busy = true;
    try {
      const included = this.allTogglesOn()
        ? undefined
        : this.enabledKeys().map(({ title, article, paragraph }) => ({
            title,
            article,
            paragraph,
          }));
      const turn = await this.api.postTurn(this.sessionId, message, included, this.k);
      const rendered = renderTurn(turn);
      this.turns.push(rendered);
      this.banner = null;
      this.setDraft("");
      // next turn's toggle candidates default to this turn's retrieval
      this.articles = turn.retrieved;
      this.toggles = new Map(turn.retrieved.map((article) => [keyId(article), true]));
      return rendered;
    } catch (error) {
      this.banner = `Request failed (${String(error)}). Your message was kept; retry when ready.`;
      return null;
    } finally {
      this.busy = false;
    }
  }
}
