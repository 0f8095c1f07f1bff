/** Wire types mirroring the /api/v1 endpoint bodies (snake_case as served). */

export interface Profile {
  profile_id: string;
  username: string;
  level: number;
  xp: number;
  icon_id: string;
  title_id: string;
  showcase: string[];
  unlocked_icons: string[];
  unlocked_titles: string[];
  customization_count: number;
}

export interface AchievementDef {
  id: string;
  name: string;
  description: string;
  icon_ref: string;
  scope: 'global' | 'project';
  counter: string;
  milestones: number[];
  xp_per_milestone: number[];
  daily_threshold: number | null;
  core_drive: string;
}

export interface AchievementProgress {
  achievement_id: string;
  scope_key: string;
  counter: number;
  milestones_reached: number;
}

export interface AchievementRow {
  def: AchievementDef;
  global_progress: AchievementProgress | null;
  project_progress: AchievementProgress | null;
}

export interface DailyTask {
  date: string;
  achievement_id: string;
  threshold: number;
  counter: number;
  completed: boolean;
  xp_reward: number;
}

export interface UnlockableItem {
  id: string;
  required_level: number;
  unlocked: boolean;
}

export interface Unlockables {
  icons: UnlockableItem[];
  titles: UnlockableItem[];
}

export interface MilestoneCross {
  achievement_id: string;
  scope_key: string;
  milestone_index: number;
  xp_awarded: number;
}

export interface IngestOutcome {
  session_id: string;
  duplicate: boolean;
  milestones_crossed: MilestoneCross[];
  xp_total_awarded: number;
  level_before: number;
  level_after: number;
  newly_unlocked_icons: string[];
  newly_unlocked_titles: string[];
  fixed_tests: string[];
}

export interface ProfileEditResponse {
  profile: Profile;
  outcome: IngestOutcome;
}
