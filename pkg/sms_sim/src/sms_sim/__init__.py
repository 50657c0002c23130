"""Deterministic SMS network simulator, scenario runner and REPL for sms_remote."""
