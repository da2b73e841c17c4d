"""Core configuration, models, logging, errors and thread fan-out"""
