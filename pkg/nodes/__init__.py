"""Verification workflow nodes"""
