// populated after the CLI builds
