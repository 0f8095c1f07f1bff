/** Pure view logic: the only arithmetic the UI performs.
 *
 * Every number rendered elsewhere is copied verbatim from an endpoint
 * body; this module owns the xp-to-next-level fraction, the five-slot
 * showcase rule, milestone-toast diffing and the stale-poll guard.
 */

import type { AchievementRow, Profile } from './types.js';

/** Cumulative XP per level, matching the engine's default curve. */
export const DEFAULT_LEVEL_CURVE = [0, 100, 300, 600, 1000, 1500, 2100, 2800, 3600, 4500];

export const MAX_SHOWCASE = 5;

/**
 * Fraction of the way from the current level to the next, clamped to
 * [0, 1].  At the top level there is no next threshold; the bar is full.
 */
export function xpFraction(profile: Profile, curve: number[] = DEFAULT_LEVEL_CURVE): number {
  const { level, xp } = profile;
  if (level >= curve.length) return 1;
  const floor = curve[level - 1];
  const ceil = curve[level];
  const fraction = (xp - floor) / (ceil - floor);
  return Math.min(1, Math.max(0, fraction));
}

export function xpLabel(profile: Profile, curve: number[] = DEFAULT_LEVEL_CURVE): string {
  if (profile.level >= curve.length) return `${profile.xp} XP`;
  return `${profile.xp}/${curve[profile.level]} XP`;
}

/** Tracks showcase edits locally; a sixth selection is refused. */
export class ShowcaseSelector {
  private selected: string[];

  constructor(initial: string[] = []) {
    this.selected = initial.slice(0, MAX_SHOWCASE);
  }

  get current(): string[] {
    return [...this.selected];
  }

  isSelected(id: string): boolean {
    return this.selected.includes(id);
  }

  /** Returns false (and changes nothing) when the slot limit is hit. */
  toggle(id: string): boolean {
    const at = this.selected.indexOf(id);
    if (at >= 0) {
      this.selected.splice(at, 1);
      return true;
    }
    if (this.selected.length >= MAX_SHOWCASE) {
      return false;
    }
    this.selected.push(id);
    return true;
  }
}

export interface Toast {
  achievementId: string;
  name: string;
  milestoneIndex: number;
  xp: number;
}

function reached(row: AchievementRow): number {
  return (
    (row.global_progress?.milestones_reached ?? 0) +
    (row.project_progress?.milestones_reached ?? 0)
  );
}

/** Milestones newly reached between two polls, as toast payloads. */
export function milestoneToasts(
  previous: AchievementRow[] | null,
  next: AchievementRow[],
): Toast[] {
  if (!previous) return [];
  const before = new Map(previous.map((row) => [row.def.id, reached(row)]));
  const toasts: Toast[] = [];
  for (const row of next) {
    const prev = before.get(row.def.id) ?? 0;
    const now = reached(row);
    for (let i = prev; i < now; i++) {
      toasts.push({
        achievementId: row.def.id,
        name: row.def.name,
        milestoneIndex: i,
        xp: row.def.xp_per_milestone[Math.min(i, row.def.xp_per_milestone.length - 1)],
      });
    }
  }
  return toasts;
}

/**
 * Sequence-numbered poll cache: at most one in-flight poll matters, and a
 * response that arrives after a newer one has landed is discarded.
 */
export class PollCache<T> {
  private nextSeq = 0;
  private appliedSeq = -1;
  value: T | null = null;

  begin(): number {
    return this.nextSeq++;
  }

  /** Returns true when the response was fresh and applied. */
  apply(seq: number, value: T): boolean {
    if (seq <= this.appliedSeq) return false;
    this.appliedSeq = seq;
    this.value = value;
    return true;
  }
}
