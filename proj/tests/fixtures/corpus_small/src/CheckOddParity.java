class CheckOddParity {

    public static boolean checkOddParity(int x) {
        return x % 2 != 0;
    }
}
