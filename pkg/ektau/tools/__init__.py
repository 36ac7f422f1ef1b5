"""Dict-returning tool functions behind the command-line subcommands."""
