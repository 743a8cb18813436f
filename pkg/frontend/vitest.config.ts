import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // Parity suites spawn the Python CLI dozens of times; allow for cold starts.
    testTimeout: 300_000,
    hookTimeout: 120_000,
  },
});
