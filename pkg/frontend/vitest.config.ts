import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // Server-backed tests wait for a real process to boot.
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
