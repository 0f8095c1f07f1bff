/** DOM rendering: turns endpoint bodies into the profile/achievements panel. */

import type { AchievementRow, DailyTask, Profile, Unlockables } from './types.js';
import { xpFraction, xpLabel, type Toast } from './viewmodel.js';

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderProfile(root: HTMLElement, profile: Profile): void {
  root.replaceChildren();
  const head = el('div', 'profile-head');
  head.append(
    el('div', 'profile-icon', profile.icon_id),
    el('h2', 'profile-name', profile.username),
    el('div', 'profile-title', profile.title_id),
  );
  const levelRow = el('div', 'level-row');
  levelRow.append(
    el('span', 'level-badge', `Level ${profile.level}`),
    el('span', 'xp-label', xpLabel(profile)),
  );
  const bar = el('div', 'xp-bar');
  const fill = el('div', 'xp-bar-fill');
  fill.style.width = `${(xpFraction(profile) * 100).toFixed(1)}%`;
  bar.append(fill);
  root.append(head, levelRow, bar);
  if (profile.showcase.length > 0) {
    const showcase = el('div', 'showcase');
    showcase.append(el('h3', undefined, 'Showcase'));
    for (const id of profile.showcase) {
      showcase.append(el('span', 'showcase-item', id));
    }
    root.append(showcase);
  }
}

export function renderAchievements(root: HTMLElement, rows: AchievementRow[]): void {
  root.replaceChildren();
  for (const row of rows) {
    const progress = row.global_progress ?? row.project_progress;
    const counter = progress?.counter ?? 0;
    const done = progress?.milestones_reached ?? 0;
    const milestones = row.def.milestones;
    const target = milestones[Math.min(done, milestones.length - 1)];

    const card = el('div', 'achievement-card');
    card.append(
      el('div', 'achievement-name', row.def.name),
      el('div', 'achievement-desc', row.def.description),
      el('div', 'achievement-scope', row.def.scope),
    );
    const bar = el('div', 'milestone-bar');
    const fill = el('div', 'milestone-fill');
    fill.style.width = `${Math.min(100, (counter / target) * 100).toFixed(1)}%`;
    bar.append(fill);
    for (const m of milestones) {
      const tick = el('span', 'milestone-tick');
      tick.style.left = `${Math.min(100, (m / milestones[milestones.length - 1]) * 100)}%`;
      bar.append(tick);
    }
    card.append(bar, el('div', 'achievement-count', `${counter} · ${done}/${milestones.length} milestones`));
    root.append(card);
  }
}

export function renderDaily(root: HTMLElement, task: DailyTask | null): void {
  root.replaceChildren();
  if (!task) {
    root.append(el('div', 'daily-empty', 'No daily task available'));
    return;
  }
  root.append(
    el('div', 'daily-name', task.achievement_id),
    el('div', 'daily-progress',
      task.completed ? 'done' : `${task.counter}/${task.threshold}`),
    el('div', 'daily-reward', `+${task.xp_reward} XP`),
  );
}

export function renderUnlockables(
  root: HTMLElement,
  unlockables: Unlockables,
  onPick: (kind: 'icon_id' | 'title_id', id: string) => void,
): void {
  root.replaceChildren();
  const sections: Array<['icon_id' | 'title_id', string, Unlockables['icons']]> = [
    ['icon_id', 'Icons', unlockables.icons],
    ['title_id', 'Titles', unlockables.titles],
  ];
  for (const [kind, label, items] of sections) {
    const section = el('div', 'unlock-section');
    section.append(el('h3', undefined, label));
    for (const item of items) {
      const button = el('button', item.unlocked ? 'unlock-item' : 'unlock-item locked',
        item.unlocked ? item.id : `${item.id} (level ${item.required_level})`) as HTMLButtonElement;
      button.disabled = !item.unlocked;
      button.addEventListener('click', () => onPick(kind, item.id));
      section.append(button);
    }
    root.append(section);
  }
}

export function renderOfflineBanner(root: HTMLElement, offline: boolean): void {
  root.textContent = offline ? 'engine offline' : '';
  root.classList.toggle('visible', offline);
}

export function showToast(root: HTMLElement, toast: Toast): void {
  const node = el('div', 'toast',
    `${toast.name} ✓ milestone ${toast.milestoneIndex + 1} (+${toast.xp} XP)`);
  root.append(node);
  setTimeout(() => node.remove(), 4000);
}
