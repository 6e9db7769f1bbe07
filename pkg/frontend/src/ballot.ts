// Blind ranking ballot: local validation makes invalid submissions
// impossible before any network call. Responses arrive token-keyed and
// shuffled from the server, so system identities stay hidden until after
// submission.

import type { ApiClient } from "./api.js";
import type { BallotTask } from "./types.js";

export interface BallotState {
  questionId: string;
  responses: { token: string; text: string }[];
  ranks: Map<string, number | null>;
  draw: boolean;
}

export interface ValidationError {
  token?: string;
  message: string;
}

export interface ValidationResult {
  ok: boolean;
  errors: ValidationError[];
}

export function newBallot(task: BallotTask): BallotState {
  return {
    questionId: task.question_id,
    responses: task.responses,
    ranks: new Map(task.responses.map((r) => [r.token, null])),
    draw: false,
  };
}

export function setRank(state: BallotState, token: string, rank: number | null): void {
  if (!state.ranks.has(token)) throw new Error(`unknown response token ${token}`);
  state.ranks.set(token, rank);
}

export function setDraw(state: BallotState, draw: boolean): void {
  state.draw = draw;
}

/**
 * A ballot is valid when the draw flag is set (ranks ignored) or when every
 * response has a rank and the ranks form a permutation of 1..n.
 */
export function validateBallot(state: BallotState): ValidationResult {
  if (state.draw) return { ok: true, errors: [] };
  const errors: ValidationError[] = [];
  const n = state.responses.length;
  const seen = new Map<number, string>();
  for (const { token } of state.responses) {
    const rank = state.ranks.get(token) ?? null;
    if (rank === null) {
      errors.push({ token, message: "missing rank" });
      continue;
    }
    if (!Number.isInteger(rank) || rank < 1 || rank > n) {
      errors.push({ token, message: `rank must be between 1 and ${n}` });
      continue;
    }
    const holder = seen.get(rank);
    if (holder !== undefined) {
      errors.push({ token, message: `rank ${rank} already used` });
    } else {
      seen.set(rank, token);
    }
  }
  return { ok: errors.length === 0, errors };
}

export function canSubmit(state: BallotState): boolean {
  return validateBallot(state).ok;
}

/**
 * Submit the ballot. Invalid ballots are rejected locally and never reach
 * the network.
 */
export async function submitRanking(
  api: ApiClient,
  state: BallotState,
): Promise<ValidationResult> {
  const result = validateBallot(state);
  if (!result.ok) return result;
  if (state.draw) {
    await api.postRanking(state.questionId, [], true);
  } else {
    const entries = state.responses.map(({ token }) => ({
      token,
      rank: state.ranks.get(token) as number,
    }));
    await api.postRanking(state.questionId, entries, false);
  }
  return result;
}
