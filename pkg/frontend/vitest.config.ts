import { defineConfig } from 'vitest/config'

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    testTimeout: 200_000,
    hookTimeout: 200_000,
    // the integration suite drives one shared live service
    fileParallelism: false,
  },
})
