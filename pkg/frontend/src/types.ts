// Payload types mirroring the consultation service HTTP API (docs/api.md).

export interface ArticleKey {
  title: string;
  article: number | null;
  paragraph?: number | null;
}

export interface RetrievedArticle extends ArticleKey {
  score: number;
}

export type Verdict = "VALID" | "H1" | "H2";

export interface AuditFinding {
  citation: {
    title: string;
    article: number | null;
    paragraph: number | null;
    quoted: string | null;
    span: [number, number];
  };
  verdict: Verdict;
  matched: { title: string; article: number | null; paragraph: number | null } | null;
  similarity: number;
  content_divergence_warning: boolean;
}

export interface AuditReport {
  findings: AuditFinding[];
  has_h1: boolean;
  has_h2: boolean;
}

export interface ConsultTurn {
  user_message: string;
  retrieved: RetrievedArticle[];
  included: ArticleKey[];
  prompt: string;
  answer: string;
  audit: AuditReport;
  timing: number;
  failed: boolean;
  error: string;
}

export interface SessionPayload {
  session_id: string;
  created_at: number;
  config: Record<string, unknown>;
  turns: ConsultTurn[];
}

export interface RetrieveResponse {
  query: string;
  ranked: RetrievedArticle[];
}

export interface BallotTask {
  question_id: string;
  question: string;
  responses: { token: string; text: string }[];
}

export interface RankingSummary {
  systems: string[];
  proportions: Record<string, Record<string, number>>;
  draw: number;
  n_records: number;
}

/** Canonical string form of an article key, used as toggle-map key. */
export function keyId(key: ArticleKey): string {
  return `${key.title}#${key.article ?? ""}#${key.paragraph ?? ""}`;
}
