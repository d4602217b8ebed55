"""Test module"""