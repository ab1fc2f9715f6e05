class Maximum {

    public static int maximum(int a, int b) {
        return a > b? a : b;
    }
}
