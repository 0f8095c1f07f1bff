/** Entry point: wires the poller, the render layer and profile edits. */

import { ApiClient, ApiError } from './api.js';
import {
  renderAchievements,
  renderDaily,
  renderOfflineBanner,
  renderProfile,
  renderUnlockables,
  showToast,
} from './render.js';
import { milestoneToasts, PollCache, ShowcaseSelector } from './viewmodel.js';
import type { AchievementRow, Profile } from './types.js';

const POLL_INTERVAL_MS = 2000;

const api = new ApiClient();

const profileCache = new PollCache<Profile>();
const achievementsCache = new PollCache<AchievementRow[]>();

let previousAchievements: AchievementRow[] | null = null;
let polling = false;

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

async function poll(): Promise<void> {
  if (polling) return; // at most one in-flight poll
  polling = true;
  const profileSeq = profileCache.begin();
  const achievementsSeq = achievementsCache.begin();
  try {
    const projectId = (byId('project-filter') as HTMLInputElement).value || undefined;
    const [profile, rows, daily, unlockables] = await Promise.all([
      api.getProfile(),
      api.getAchievements(projectId),
      api.getDailyTask().catch(() => null),
      api.getUnlockables(),
    ]);
    if (profileCache.apply(profileSeq, profile)) {
      renderProfile(byId('profile'), profile);
    }
    if (achievementsCache.apply(achievementsSeq, rows)) {
      for (const toast of milestoneToasts(previousAchievements, rows)) {
        showToast(byId('toasts'), toast);
      }
      previousAchievements = rows;
      renderAchievements(byId('achievements'), rows);
    }
    renderDaily(byId('daily'), daily);
    renderUnlockables(byId('unlockables'), unlockables, pickCosmetic);
    renderOfflineBanner(byId('offline-banner'), false);
  } catch {
    renderOfflineBanner(byId('offline-banner'), true);
  } finally {
    polling = false;
  }
}

async function pickCosmetic(kind: 'icon_id' | 'title_id', id: string): Promise<void> {
  const current = profileCache.value;
  if (current) {
    // optimistic update, reverted by the next poll if the server refuses
    renderProfile(byId('profile'), { ...current, [kind]: id });
  }
  try {
    await api.putProfile({ [kind]: id });
  } catch (err) {
    if (current) renderProfile(byId('profile'), current);
    if (err instanceof ApiError) {
      renderOfflineBanner(byId('offline-banner'), false);
    }
  }
  void poll();
}

function bindProfileForm(): void {
  const form = byId('username-form') as HTMLFormElement;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const input = byId('username-input') as HTMLInputElement;
    if (!input.value) return;
    const response = await api.putProfile({ username: input.value }).catch(() => null);
    if (response) {
      for (const cross of response.outcome.milestones_crossed) {
        showToast(byId('toasts'), {
          achievementId: cross.achievement_id,
          name: cross.achievement_id,
          milestoneIndex: cross.milestone_index,
          xp: cross.xp_awarded,
        });
      }
    }
    void poll();
  });
}

function bindShowcaseEditor(): void {
  const editor = byId('showcase-editor');
  editor.addEventListener('click', async (event) => {
    const target = event.target as HTMLElement;
    const id = target.dataset.achievementId;
    if (!id) return;
    const selector = new ShowcaseSelector(profileCache.value?.showcase ?? []);
    if (!selector.toggle(id)) {
      target.classList.add('refused');
      return;
    }
    await api.putProfile({ showcase: selector.current }).catch(() => null);
    void poll();
  });
}

export function start(): void {
  bindProfileForm();
  bindShowcaseEditor();
  void poll();
  setInterval(() => void poll(), POLL_INTERVAL_MS);
}

if (typeof document !== 'undefined' && document.getElementById('profile')) {
  start();
}
