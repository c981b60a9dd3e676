import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    globalSetup: ["./tests/global-setup.ts"],
    // first run builds the fixture world and crawls it
    testTimeout: 60_000,
    hookTimeout: 120_000,
    pool: "forks",
  },
});
