"""Configuration, logging, seeding and run manifests."""
