/** Thin fetch client for the local engine's /api/v1 endpoints. */

import type {
  AchievementRow,
  DailyTask,
  Profile,
  ProfileEditResponse,
  Unlockables,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public field?: string,
  ) {
    super(message);
  }
}

export interface ProfileEdit {
  username?: string;
  icon_id?: string;
  title_id?: string;
  showcase?: string[];
}

async function parse<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? resp.statusText, body.field);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  getProfile(): Promise<Profile> {
    return fetch(`${this.base}/api/v1/profile`).then((r) => parse<Profile>(r));
  }

  putProfile(edit: ProfileEdit): Promise<ProfileEditResponse> {
    return fetch(`${this.base}/api/v1/profile`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(edit),
    }).then((r) => parse<ProfileEditResponse>(r));
  }

  getAchievements(projectId?: string): Promise<AchievementRow[]> {
    const query = projectId ? `?project_id=${encodeURIComponent(projectId)}` : '';
    return fetch(`${this.base}/api/v1/achievements${query}`).then((r) =>
      parse<AchievementRow[]>(r),
    );
  }

  getDailyTask(): Promise<DailyTask> {
    return fetch(`${this.base}/api/v1/daily-task`).then((r) => parse<DailyTask>(r));
  }

  getUnlockables(): Promise<Unlockables> {
    return fetch(`${this.base}/api/v1/unlockables`).then((r) => parse<Unlockables>(r));
  }
}
