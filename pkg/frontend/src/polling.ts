// Explanation job polling with exponential backoff. One in-flight job
// per tab: starting a new poll aborts the previous one.

import type { ApiClient } from "./client.js";
import type { ExplainJob } from "./types.js";

export type Sleeper = (ms: number) => Promise<void>;

const defaultSleep: Sleeper = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export interface PollOptions {
  baseDelayMs?: number;
  maxDelayMs?: number;
  maxAttempts?: number;
  sleep?: Sleeper;
  onUpdate?: (job: ExplainJob) => void;
}

export async function pollJob(
  client: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<ExplainJob> {
  const {
    baseDelayMs = 250,
    maxDelayMs = 4000,
    maxAttempts = 60,
    sleep = defaultSleep,
    onUpdate,
  } = options;
  let delay = baseDelayMs;
  for (let attempt = 0; attempt < maxAttempts; attempt++) {
    const job = await client.explainStatus(jobId);
    onUpdate?.(job);
    if (job.status === "done" || job.status === "failed") return job;
    await sleep(delay);
    delay = Math.min(delay * 2, maxDelayMs);
  }
  throw new Error(`job ${jobId} still pending after ${maxAttempts} polls`);
}

export class SingleFlight {
  private token = 0;

  /** Run `work`; if another run starts meanwhile, the stale result is
   * discarded (resolves to null). */
  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const mine = ++this.token;
    const result = await work();
    return mine === this.token ? result : null;
  }
}
