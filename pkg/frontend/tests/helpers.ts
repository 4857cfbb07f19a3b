import type { IterationRecord, QueueItem, TaxonomyRecord } from "../src/types.js";

export const TAXONOMY: TaxonomyRecord[] = [
  { id: "Inc", name: "Incomplete", category: "structural", description: "Misses essential components, making the question unfinished.", dimensions: ["fluency"] },
  { id: "NAQ", name: "Not A Question", category: "structural", description: "Lacks interrogative structure or is a statement rather than a question.", dimensions: ["clarity"] },
  { id: "Spell", name: "Spell Error", category: "linguistic", description: "Contains misspelled words affecting readability or clarity.", dimensions: ["fluency"] },
  { id: "Gram", name: "Grammar Error", category: "linguistic", description: "Grammatical issues such as incorrect word order, tense, subject-verb agreement.", dimensions: ["fluency"] },
  { id: "Vag", name: "Vague", category: "linguistic", description: "The question is unclear, overly broad, or ambiguous in meaning.", dimensions: ["clarity"] },
  { id: "Copy", name: "Unnecessary Copy from Passage", category: "linguistic", description: "Overquotes or redundantly copies large portions of the passage.", dimensions: ["conciseness"] },
  { id: "OTP", name: "Off Topic", category: "content_related", description: "The question is unrelated to the topic of the passage.", dimensions: ["relevance"] },
  { id: "Fact", name: "Factual Error", category: "content_related", description: "Includes incorrect facts that contradict the passage.", dimensions: ["consistency"] },
  { id: "INM", name: "Information Not Mentioned", category: "content_related", description: "Asks for information not present in the passage.", dimensions: ["consistency"] },
  { id: "OTA", name: "Off Target Answer", category: "content_related", description: "Does not align with the provided answer.", dimensions: ["answer_consistency"] },
  { id: "NoErr", name: "No Error", category: "none", description: "The question is clear, relevant, and answerable without any issues.", dimensions: ["fluency"] },
];

export const DIMENSIONS = [
  "fluency", "clarity", "conciseness", "relevance",
  "consistency", "answerability", "answer_consistency",
];

export function queueItem(id: string, uncertainty: number, predicted: string[] = ["Inc"]): QueueItem {
  return {
    sample_id: id,
    passage: `Passage for ${id}.`,
    answer: "answer",
    question: `Question for ${id}?`,
    predicted,
    confidences: Array(11).fill(0.4),
    p_e: 0.6,
    p_v: 0.4,
    uncertainty,
    inconsistency: 0.2,
    status: "pending",
  };
}

export function iterationRecord(index: number, microF1: number): IterationRecord {
  return {
    index,
    added_reliable: index * 10,
    added_human: index * 5,
    train_size: 100 + index * 20,
    pool_size: 500 - index * 30,
    queue_pending: 12,
    micro_f1: microF1,
    macro_f1: microF1 - 0.05,
    weighted_f1: microF1 - 0.02,
    emr: microF1 - 0.1,
    opr: 0.4 - index * 0.05,
  };
}

type Handler = (init?: RequestInit) => { status?: number; body: unknown };

export class MockServer {
  routes = new Map<string, Handler>();
  calls: Array<{ key: string; body: unknown }> = [];

  on(method: string, path: string, handler: Handler): void {
    this.routes.set(`${method} ${path}`, handler);
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const key = `${method} ${input}`;
    const handler = this.routes.get(key);
    this.calls.push({
      key,
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    if (!handler) {
      return new Response(
        JSON.stringify({ error: { code: "not_found", message: `no route ${key}` } }),
        { status: 404, headers: { "Content-Type": "application/json" } },
      );
    }
    const { status = 200, body } = handler(init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
