/**
 * Thin typed client for the delta-recourse scoring service.
 *
 * Besides the parsed JSON, responses that carry probabilities also expose
 * the raw number tokens exactly as they appeared on the wire (see
 * `rawNumberToken`). The UI displays those tokens verbatim, which keeps the
 * "server authority" invariant testable at the string level.
 */

import type {
  ClustersResponse,
  ConstraintSet,
  CounterfactualResponse,
  KbRowResponse,
  PredictResponse,
  SchemaResponse,
  ServiceError,
  WhatifResponse,
} from './types';

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ServiceError) {
    super(body.message);
    this.status = status;
    this.code = body.error;
  }
}

/**
 * Extract the literal JSON number token for a top-level key from a response
 * body, e.g. rawNumberToken('{"prob_after":0.7272727272727273}', 'prob_after')
 * -> "0.7272727272727273". Returns null when the key is absent.
 */
export function rawNumberToken(jsonText: string, key: string): string | null {
  const pattern = new RegExp(`"${key}"\\s*:\\s*(-?(?:\\d+\\.?\\d*|\\.\\d+)(?:[eE][+-]?\\d+)?)`);
  const match = pattern.exec(jsonText);
  return match ? match[1]! : null;
}

export interface WhatifResult {
  body: WhatifResponse;
  /** Raw tokens for the fields the UI displays. */
  raw: { prob_before: string; prob_after: string; delta: string };
}

export interface CounterfactualRequest {
  row_id?: string;
  cells?: number[];
  constraints?: Partial<ConstraintSet>;
  threshold?: number;
  mode?: 'counterfactual' | 'preventive';
  steps?: number;
}

export class ServiceClient {
  readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(baseUrl: string, fetchFn: typeof fetch = fetch) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn;
  }

  private async request(path: string, init?: RequestInit): Promise<{ text: string; json: unknown }> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const text = await resp.text();
    const json = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ApiError(resp.status, json as ServiceError);
    }
    return { text, json };
  }

  private post(path: string, body: unknown): Promise<{ text: string; json: unknown }> {
    return this.request(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  async schema(): Promise<SchemaResponse> {
    return (await this.request('/schema')).json as SchemaResponse;
  }

  async predict(cells: number[]): Promise<PredictResponse> {
    return (await this.post('/predict', { cells })).json as PredictResponse;
  }

  async whatif(cells: number[], changes: { variable: string; cell: number }[]): Promise<WhatifResult> {
    const { text, json } = await this.post('/whatif', { cells, changes });
    return {
      body: json as WhatifResponse,
      raw: {
        prob_before: rawNumberToken(text, 'prob_before') ?? '',
        prob_after: rawNumberToken(text, 'prob_after') ?? '',
        delta: rawNumberToken(text, 'delta') ?? '',
      },
    };
  }

  async counterfactual(req: CounterfactualRequest): Promise<CounterfactualResponse> {
    return (await this.post('/counterfactual', req)).json as CounterfactualResponse;
  }

  async kbRow(id: string): Promise<KbRowResponse> {
    return (await this.request(`/kb/row/${encodeURIComponent(id)}`)).json as KbRowResponse;
  }

  async kbFrontier(maxSteps: number, threshold = 0.5): Promise<string[]> {
    const { json } = await this.request(`/kb/frontier?max_steps=${maxSteps}&threshold=${threshold}`);
    return (json as { ids: string[] }).ids;
  }

  async clusters(): Promise<ClustersResponse> {
    return (await this.request('/clusters')).json as ClustersResponse;
  }
}
