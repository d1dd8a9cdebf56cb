"""
sisosense package initialization
"""
