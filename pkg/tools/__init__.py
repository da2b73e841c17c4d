"""Information measures, channels, the alpha functional, bounds, checks and reports"""
