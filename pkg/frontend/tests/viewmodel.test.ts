import { describe, expect, it } from 'vitest';

import {
  DEFAULT_LEVEL_CURVE,
  MAX_SHOWCASE,
  milestoneToasts,
  PollCache,
  ShowcaseSelector,
  xpFraction,
  xpLabel,
} from '../src/viewmodel.js';
import type { AchievementRow, Profile } from '../src/types.js';

import profileFixture from './fixtures/profile.json';
import achievementsFixture from './fixtures/achievements.json';

const profile = profileFixture as Profile;
const achievements = achievementsFixture as AchievementRow[];

function at(level: number, xp: number): Profile {
  return { ...profile, level, xp };
}

describe('xpFraction', () => {
  it('matches (xp - floor) / (ceil - floor) on the fixture profile', () => {
    // fixture: level 1, 50 XP; level 2 needs 100
    expect(profile.level).toBe(1);
    expect(profile.xp).toBe(50);
    expect(xpFraction(profile)).toBeCloseTo(0.5, 10);
  });

  it('is 0 at the bottom of a level and approaches 1 near the top', () => {
    expect(xpFraction(at(2, 100))).toBe(0);
    expect(xpFraction(at(2, 299))).toBeCloseTo(199 / 200, 10);
    expect(xpFraction(at(3, 450))).toBeCloseTo((450 - 300) / (600 - 300), 10);
  });

  it('clamps to [0, 1]', () => {
    expect(xpFraction(at(2, 50))).toBe(0); // inconsistent body, still clamped
    expect(xpFraction(at(2, 9999))).toBe(1);
  });

  it('shows a full bar at the top level', () => {
    expect(xpFraction(at(10, 4500))).toBe(1);
    expect(xpFraction(at(10, 99999))).toBe(1);
  });

  it('labels xp against the next threshold', () => {
    expect(xpLabel(profile)).toBe('50/100 XP');
    expect(xpLabel(at(10, 6000))).toBe('6000 XP');
  });

  it('uses the engine default curve', () => {
    expect(DEFAULT_LEVEL_CURVE).toEqual([0, 100, 300, 600, 1000, 1500, 2100, 2800, 3600, 4500]);
  });
});

describe('ShowcaseSelector', () => {
  it('allows up to five selections', () => {
    const selector = new ShowcaseSelector();
    for (let i = 0; i < MAX_SHOWCASE; i++) {
      expect(selector.toggle(`ach-${i}`)).toBe(true);
    }
    expect(selector.current).toHaveLength(5);
  });

  it('refuses a sixth selection and leaves state unchanged', () => {
    const selector = new ShowcaseSelector(['a', 'b', 'c', 'd', 'e']);
    expect(selector.toggle('f')).toBe(false);
    expect(selector.current).toEqual(['a', 'b', 'c', 'd', 'e']);
  });

  it('deselecting frees a slot', () => {
    const selector = new ShowcaseSelector(['a', 'b', 'c', 'd', 'e']);
    expect(selector.toggle('a')).toBe(true);
    expect(selector.toggle('f')).toBe(true);
    expect(selector.current).toEqual(['b', 'c', 'd', 'e', 'f']);
  });

  it('starts from the fixture showcase', () => {
    const selector = new ShowcaseSelector(profile.showcase);
    expect(selector.isSelected('clicker')).toBe(true);
  });
});

describe('milestoneToasts', () => {
  it('is empty on the first poll', () => {
    expect(milestoneToasts(null, achievements)).toEqual([]);
  });

  it('emits one toast per newly reached milestone', () => {
    const before = achievements;
    const after = achievements.map((row) =>
      row.def.id === 'clicker' && row.project_progress
        ? {
            ...row,
            project_progress: {
              ...row.project_progress,
              counter: 60,
              milestones_reached: row.project_progress.milestones_reached + 1,
            },
          }
        : row,
    );
    const toasts = milestoneToasts(before, after);
    expect(toasts).toHaveLength(1);
    expect(toasts[0].name).toBe('Clicker');
    expect(toasts[0].xp).toBe(50);
  });

  it('emits nothing when progress is unchanged', () => {
    expect(milestoneToasts(achievements, achievements)).toEqual([]);
  });
});

describe('PollCache', () => {
  it('applies responses in order', () => {
    const cache = new PollCache<number>();
    const a = cache.begin();
    const b = cache.begin();
    expect(cache.apply(a, 1)).toBe(true);
    expect(cache.apply(b, 2)).toBe(true);
    expect(cache.value).toBe(2);
  });

  it('discards a stale response arriving after a newer one', () => {
    const cache = new PollCache<number>();
    const stale = cache.begin();
    const fresh = cache.begin();
    expect(cache.apply(fresh, 2)).toBe(true);
    expect(cache.apply(stale, 1)).toBe(false);
    expect(cache.value).toBe(2);
  });
});
