/** Wire types mirroring the service JSON schemas. */
export const AGENT_NAMES = ["Conv", "Pref", "Ctx", "Rank"];
